//! Discrete p-harmonic maps from triangulated planar domains into model
//! manifolds `dr² + σ(r)² dθ²`, together with the geometric constructions
//! that keep such targets non-positively curved:
//!
//! * [`warp`]: warping functions, curvature formulas, Cartan–Hadamard and
//!   hyperbolic-type classification.
//! * [`glue`]: convex surgery of two warping functions with a certificate.
//! * [`blend`]: partition-of-unity blending of polar metrics and a strict
//!   convexity certificate for the radial coordinate.
//! * [`chart`]: the global chart `x = rΘ` of a model target.
//! * [`mesh`]: structured triangulations with boundary flags.
//! * [`solver`]: discrete p-energy, gradient, minimization, maximum
//!   principle and uniqueness probes.
//! * [`mtm`]: energy identity for degree-zero homogeneous extensions.
// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blend;
pub mod chart;
pub mod error;
pub mod glue;
pub mod mesh;
pub mod mtm;
pub mod numeric;
pub mod solver;
pub mod warp;

pub use error::{Error, Result};
