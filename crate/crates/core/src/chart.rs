//! Global Cartesian chart `x = rΘ` of a rotationally symmetric target.
//!
//! In this chart the model metric `dr² + σ(r)² dΘ²` reads
//! `h_ij = g δ_ij + q x_i x_j` with `g = (σ/r)²` and `q = (1 − g)/r²`.

use crate::error::{Error, Result};
use crate::warp::{ModelManifold, Warp, WarpingFunction};

/// Below this radius the metric uses its Taylor expansion at the pole.
pub const R_TINY: f64 = 1e-6;

/// Largest supported target dimension.
pub const MAX_DIM: usize = 3;

/// Row-major `n×n` metric, valid entries `[..n*n]`.
pub type Metric = [f64; MAX_DIM * MAX_DIM];

/// `∂h_ij/∂x^k` stored at `k*n*n + i*n + j`.
pub type MetricJacobian = [f64; MAX_DIM * MAX_DIM * MAX_DIM];

#[derive(Debug, Clone)]
pub enum TargetChart {
    /// The Euclidean line, `h = 1`.
    Line,
    Model(ModelManifold),
}

impl TargetChart {
    pub fn model(dim: usize, warp: WarpingFunction) -> Result<Self> {
        if dim > MAX_DIM {
            return Err(Error::usage(format!(
                "target dimension {dim} exceeds the supported maximum {MAX_DIM}"
            )));
        }
        Ok(TargetChart::Model(ModelManifold::new(dim, warp)?))
    }

    pub fn dim(&self) -> usize {
        match self {
            TargetChart::Line => 1,
            TargetChart::Model(m) => m.dim(),
        }
    }

    /// `(g, q, g′/r, q′/r)` at radius `r`.
    fn radial_coefficients(warp: &WarpingFunction, r: f64) -> Result<[f64; 4]> {
        if r < R_TINY {
            let a = pole_third(warp)?;
            let g = 1.0 + a * r * r / 3.0;
            return Ok([g, -a / 3.0, 2.0 * a / 3.0, -a * a / 18.0]);
        }
        let jet = warp.jet(r)?;
        let ratio = jet.value / r;
        let g = ratio * ratio;
        let r2 = r * r;
        let one_minus_g = (1.0 - ratio) * (1.0 + ratio);
        let q = one_minus_g / r2;
        let dg = 2.0 * ratio * (jet.d1 * r - jet.value) / r2;
        let dq = -dg / r2 - 2.0 * one_minus_g / (r2 * r);
        Ok([g, q, dg / r, dq / r])
    }

    pub fn metric_at(&self, x: &[f64]) -> Result<Metric> {
        let n = self.dim();
        check_point(x, n)?;
        let mut h = [0.0; MAX_DIM * MAX_DIM];
        match self {
            TargetChart::Line => h[0] = 1.0,
            TargetChart::Model(m) => {
                let [g, q, _, _] = Self::radial_coefficients(m.warp(), norm(x))?;
                for i in 0..n {
                    for j in 0..n {
                        h[i * n + j] = q * x[i] * x[j];
                    }
                    h[i * n + i] += g;
                }
            }
        }
        Ok(h)
    }

    pub fn metric_jacobian_at(&self, x: &[f64]) -> Result<MetricJacobian> {
        let n = self.dim();
        check_point(x, n)?;
        let mut dh = [0.0; MAX_DIM * MAX_DIM * MAX_DIM];
        if let TargetChart::Model(m) = self {
            let [_, q, dg_r, dq_r] = Self::radial_coefficients(m.warp(), norm(x))?;
            for k in 0..n {
                for i in 0..n {
                    for j in i..n {
                        let mut v = dq_r * x[k] * x[i] * x[j];
                        if i == j {
                            v += dg_r * x[k];
                        }
                        if i == k {
                            v += q * x[j];
                        }
                        if j == k {
                            v += q * x[i];
                        }
                        dh[k * n * n + i * n + j] = v;
                        dh[k * n * n + j * n + i] = v;
                    }
                }
            }
        }
        Ok(dh)
    }

    /// Geodesic distance to the pole, which is `|x|` in this chart.
    pub fn dist_to_pole(&self, x: &[f64]) -> f64 {
        norm(x)
    }

    /// `|v|_h` at `x`.
    pub fn norm_at(&self, x: &[f64], v: &[f64]) -> Result<f64> {
        let n = self.dim();
        let h = self.metric_at(x)?;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += h[i * n + j] * v[i] * v[j];
            }
        }
        Ok(s.max(0.0).sqrt())
    }
}

fn pole_third(warp: &WarpingFunction) -> Result<f64> {
    match warp {
        WarpingFunction::SampledSpline(s) => {
            if s.radii()[0] > 0.0 {
                return Err(Error::domain(format!(
                    "sampled warp starts at r = {} and cannot be evaluated at the pole",
                    s.radii()[0]
                )));
            }
            Ok(s.first_interval_third())
        }
        other => other
            .pole_third_derivative()
            .ok_or_else(|| Error::domain(format!("no pole expansion available for warp {other}"))),
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn check_point(x: &[f64], n: usize) -> Result<()> {
    if x.len() != n {
        return Err(Error::usage(format!(
            "point has {} coordinates, target dimension is {n}",
            x.len()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("point has non-finite coordinates"));
    }
    Ok(())
}
