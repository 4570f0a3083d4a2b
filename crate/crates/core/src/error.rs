use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller-side precondition was violated.
    #[error("usage error: {0}")]
    Usage(String),

    /// A doubling search ran past its cap.
    #[error("search exhausted at k = {k_last}: {violated}")]
    SearchExhausted { k_last: f64, violated: String },

    #[error("infeasible construction: {0}")]
    Infeasible(String),

    #[error("construction error: {0}")]
    Construction(String),

    #[error("divergence: {0}")]
    Divergence(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}
