//! Flag-driven front end: every run is one line of arguments, writes its
//! artifacts into `--out-dir` and reports through the exit code.
//!
//! Exit codes: `0` success, `1` a certified check failed or a construction
//! could not be completed, `2` usage error (bad flags, missing or malformed
//! input, violated precondition such as `p < 2`).

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
pub mod plot;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    /// A run completed but its certificate or check did not pass.
    #[error("check failed: {0}")]
    Check(String),
    #[error(transparent)]
    Core(#[from] pharmonic::Error),
    #[error("cannot serialize output: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use pharmonic::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Check(_) | CliError::Json(_) => 1,
            CliError::Core(e) => match e {
                E::Usage(_) | E::Parse(_) | E::Domain(_) | E::Io(_) => 2,
                E::SearchExhausted { .. }
                | E::Infeasible(_)
                | E::Construction(_)
                | E::Divergence(_)
                | E::Internal(_) => 1,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "pharmonic",
    version,
    about = "Certified gluing, blending and p-harmonic map solving"
)]
pub struct Cli {
    /// Worker threads for the parallel kernels (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Overrides the main tolerance of the command (value tolerance for
    /// `glue`, gradient tolerance for `solve` and `verify uniqueness`).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed for randomized starts.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Directory receiving the output files.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Inspect a warping function.
    #[command(subcommand)]
    Warp(WarpCommand),
    /// Glue an inner warp into a rescaled outer one and certify convexity.
    Glue(GlueArgs),
    /// Blend a sampled polar metric into a rescaled hyperbolic one.
    Blend(BlendArgs),
    /// Build a mesh file.
    #[command(subcommand)]
    Mesh(MeshCommand),
    /// Minimize the discrete p-energy with fixed boundary values.
    Solve(SolveArgs),
    /// Check properties of solutions.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Refinement table for the energy factorization of radial extensions.
    Mtm(MtmArgs),
}

#[derive(Debug, Subcommand)]
pub enum WarpCommand {
    /// Print sectional curvatures on a uniform grid of (0, rmax].
    Check {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        rmax: f64,
        #[arg(long, default_value_t = 200)]
        n: usize,
        /// Also write `curvature.svg`.
        #[arg(long)]
        plot: bool,
    },
    /// Write the warp sampled on `n+1` uniform knots of [0, rmax] to `warp.csv`.
    Sample {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        rmax: f64,
        #[arg(long, default_value_t = 400)]
        n: usize,
        #[arg(long, default_value = "warp.csv")]
        out: String,
    },
}

#[derive(Debug, Args)]
pub struct GlueArgs {
    #[arg(long)]
    pub rho: String,
    #[arg(long)]
    pub sigma: String,
    #[arg(long)]
    pub rbar: f64,
    #[arg(long)]
    pub r: f64,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = 1e6)]
    pub kmax: f64,
    /// Uniform certification points before band edges are merged in.
    #[arg(long, default_value_t = 4000)]
    pub n: usize,
    /// Also write `tau.svg`.
    #[arg(long)]
    pub plot: bool,
}

#[derive(Debug, Args)]
pub struct BlendArgs {
    #[arg(long)]
    pub metric: PathBuf,
    #[arg(long)]
    pub r1: f64,
    #[arg(long)]
    pub r2: f64,
    #[arg(long, default_value_t = 1e12)]
    pub kmax: f64,
    /// Use this scale instead of searching for one; the certificate then
    /// reports whether it suffices.
    #[arg(long)]
    pub k: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum MeshCommand {
    /// Polar mesh of r0 ≤ |x| ≤ r1.
    Annulus {
        #[arg(long)]
        r0: f64,
        #[arg(long)]
        r1: f64,
        #[arg(long)]
        nr: usize,
        #[arg(long)]
        ntheta: usize,
        /// Midpoint refinements applied after construction.
        #[arg(long, default_value_t = 0)]
        refine: usize,
        #[arg(long, default_value = "mesh.txt")]
        out: String,
    },
    /// Rectangle [0,w]×[0,h] with nx×ny diagonal-split cells.
    Rect {
        #[arg(long)]
        w: f64,
        #[arg(long)]
        h: f64,
        #[arg(long)]
        nx: usize,
        #[arg(long)]
        ny: usize,
        #[arg(long, default_value_t = 0)]
        refine: usize,
        #[arg(long, default_value = "mesh.txt")]
        out: String,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum QuadratureArg {
    Centroid,
    EdgeMidpoints,
}

impl From<QuadratureArg> for pharmonic::solver::Quadrature {
    fn from(q: QuadratureArg) -> Self {
        match q {
            QuadratureArg::Centroid => pharmonic::solver::Quadrature::Centroid,
            QuadratureArg::EdgeMidpoints => pharmonic::solver::Quadrature::EdgeMidpoints,
        }
    }
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    /// Warp spec of the target model; 1-dimensional data requires `identity`.
    #[arg(long)]
    pub target: String,
    #[arg(long)]
    pub p: f64,
    /// Boundary values, header `vertex,x1,...,xn`.
    #[arg(long)]
    pub bc: PathBuf,
    #[arg(long)]
    pub maxit: Option<usize>,
    #[arg(long, value_enum, default_value_t = QuadratureArg::Centroid)]
    pub quadrature: QuadratureArg,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Also write `trace.svg` and `solution.svg`.
    #[arg(long)]
    pub plot: bool,
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// Margin of the squared-distance maximum principle for a solution file.
    MaxPrinciple {
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        target: String,
    },
    /// Solve from several seeded starts and report the spread of the results.
    Uniqueness {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, default_value_t = 8)]
        starts: usize,
        /// Largest admissible pairwise sup-distance.
        #[arg(long, default_value_t = 1e-6)]
        spread_tol: f64,
    },
}

#[derive(Debug, Args)]
pub struct MtmArgs {
    #[arg(long)]
    pub target: String,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub r0: f64,
    #[arg(long = "R")]
    pub r_outer: f64,
    /// Number of refinement levels after the base level.
    #[arg(long, default_value_t = 3)]
    pub refine: usize,
    #[arg(long, default_value_t = 4)]
    pub nr0: usize,
    #[arg(long, default_value_t = 16)]
    pub ntheta0: usize,
    /// Radius of the circle loop in chart coordinates.
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Instead of the table, print the blow-up report for this decreasing
    /// list of inner radii (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub blowup: Option<Vec<f64>>,
    #[arg(long, default_value_t = 16)]
    pub layers_per_decade: usize,
    /// Angles of the loop in blow-up mode.
    #[arg(long, default_value_t = 64)]
    pub ntheta: usize,
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code. Diagnostics go to standard error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("pharmonic: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> CliResult<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be ≥ 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
    if !cli.out_dir.is_dir() {
        return Err(CliError::Usage(format!(
            "output directory {} does not exist",
            cli.out_dir.display()
        )));
    }
    pool.install(|| commands::dispatch(cli))
}
