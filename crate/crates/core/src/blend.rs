//! Blending a two-dimensional polar metric `dt² + j(t,θ) dθ²` into the
//! hyperbolic metric `dt² + h^{(k)}(t) dθ²` across an annulus, with a
//! certificate that the radial coordinate stays strictly convex.
//!
//! For such a metric `Hess T(X,X) = ½ (X^θ)² ∂_t j`, so strict convexity of
//! `T` off the radial direction is the sign condition `∂_t j > 0`.

use std::fmt;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// An analytic angular coefficient `j(t,θ)` with its partial derivatives.
pub trait MetricField: Send + Sync + fmt::Debug {
    fn value(&self, t: f64, theta: f64) -> f64;
    fn dt(&self, t: f64, theta: f64) -> f64;
    fn dtheta(&self, _t: f64, _theta: f64) -> f64 {
        0.0
    }
}

/// Euclidean plane, `j = t²`.
#[derive(Debug, Clone, Copy)]
pub struct FlatField;

impl MetricField for FlatField {
    fn value(&self, t: f64, _: f64) -> f64 {
        t * t
    }
    fn dt(&self, t: f64, _: f64) -> f64 {
        2.0 * t
    }
}

/// Hyperbolic plane of curvature `−k`, `j = h^{(k)}(t)`.
#[derive(Debug, Clone, Copy)]
pub struct HyperbolicField {
    pub k: f64,
}

impl MetricField for HyperbolicField {
    fn value(&self, t: f64, _: f64) -> f64 {
        hyperbolic_coefficient(self.k, t)
    }
    fn dt(&self, t: f64, _: f64) -> f64 {
        hyperbolic_coefficient_dt(self.k, t)
    }
}

/// `j = exp(rate·t)`.
#[derive(Debug, Clone, Copy)]
pub struct ExpField {
    pub rate: f64,
}

impl MetricField for ExpField {
    fn value(&self, t: f64, _: f64) -> f64 {
        (self.rate * t).exp()
    }
    fn dt(&self, t: f64, _: f64) -> f64 {
        self.rate * (self.rate * t).exp()
    }
}

/// `j = ν²` with `ν = t + (c0 + c1 sin θ) t³`.
#[derive(Debug, Clone, Copy)]
pub struct CubicRayField {
    pub c0: f64,
    pub c1: f64,
}

impl MetricField for CubicRayField {
    fn value(&self, t: f64, theta: f64) -> f64 {
        let nu = t + (self.c0 + self.c1 * theta.sin()) * t.powi(3);
        nu * nu
    }
    fn dt(&self, t: f64, theta: f64) -> f64 {
        let c = self.c0 + self.c1 * theta.sin();
        2.0 * (t + c * t.powi(3)) * (1.0 + 3.0 * c * t * t)
    }
    fn dtheta(&self, t: f64, theta: f64) -> f64 {
        2.0 * (t + (self.c0 + self.c1 * theta.sin()) * t.powi(3))
            * self.c1
            * theta.cos()
            * t.powi(3)
    }
}

/// `ĵ = φ_j j + φ_h h^{(k)}` evaluated analytically.
#[derive(Debug, Clone)]
pub struct BlendedField {
    pub inner: Arc<dyn MetricField>,
    pub k: f64,
    pub r1: f64,
    pub r2: f64,
}

impl MetricField for BlendedField {
    fn value(&self, t: f64, theta: f64) -> f64 {
        let (pj, ph) = partition(t, self.r1, self.r2);
        pj * self.inner.value(t, theta) + ph * hyperbolic_coefficient(self.k, t)
    }
    fn dt(&self, t: f64, theta: f64) -> f64 {
        let j = self.inner.value(t, theta);
        let h = hyperbolic_coefficient(self.k, t);
        let dh = hyperbolic_coefficient_dt(self.k, t);
        let (pj, _) = partition(t, self.r1, self.r2);
        dh + partition_dt(t, self.r1, self.r2) * (j - h) + pj * (self.inner.dt(t, theta) - dh)
    }
    fn dtheta(&self, t: f64, theta: f64) -> f64 {
        partition(t, self.r1, self.r2).0 * self.inner.dtheta(t, theta)
    }
}

/// `h^{(k)}(t) = sinh²(√k t)/k`.
pub fn hyperbolic_coefficient(k: f64, t: f64) -> f64 {
    let s = (k.sqrt() * t).sinh();
    s * s / k
}

/// `∂_t h^{(k)} = sinh(2√k t)/√k`.
pub fn hyperbolic_coefficient_dt(k: f64, t: f64) -> f64 {
    (2.0 * k.sqrt() * t).sinh() / k.sqrt()
}

fn smoothstep(x: f64) -> f64 {
    x * x * x * (10.0 + x * (-15.0 + 6.0 * x))
}

/// Partition of unity `(φ_j, φ_h)` with `φ_j = 1 − S((t−R1)/(R2−R1))`.
pub fn partition(t: f64, r1: f64, r2: f64) -> (f64, f64) {
    if t <= r1 {
        (1.0, 0.0)
    } else if t >= r2 {
        (0.0, 1.0)
    } else {
        let pj = 1.0 - smoothstep((t - r1) / (r2 - r1));
        (pj, 1.0 - pj)
    }
}

/// `φ_j′(t)`.
pub fn partition_dt(t: f64, r1: f64, r2: f64) -> f64 {
    if t <= r1 || t >= r2 {
        return 0.0;
    }
    let x = (t - r1) / (r2 - r1);
    -30.0 * x * x * (1.0 - x) * (1.0 - x) / (r2 - r1)
}

/// Samples of `j(t,θ)` on a tensor grid, row-major by `t`.
#[derive(Debug, Clone)]
pub struct PolarMetricGrid {
    t_grid: Vec<f64>,
    theta_grid: Vec<f64>,
    j: Vec<f64>,
    field: Option<Arc<dyn MetricField>>,
}

impl PolarMetricGrid {
    pub fn new(t_grid: Vec<f64>, ntheta: usize, j: Vec<f64>) -> Result<Self> {
        if t_grid.is_empty() || !(t_grid[0] > 0.0) || t_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::usage(
                "t grid must be positive and strictly increasing",
            ));
        }
        if ntheta < 1 {
            return Err(Error::usage("θ grid must be non-empty"));
        }
        if j.len() != t_grid.len() * ntheta {
            return Err(Error::usage(format!(
                "expected {} metric samples, got {}",
                t_grid.len() * ntheta,
                j.len()
            )));
        }
        if let Some(i) = j.iter().position(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::usage(format!(
                "metric coefficient must be positive and finite; sample {i} is {}",
                j[i]
            )));
        }
        let theta_grid = (0..ntheta)
            .map(|i| std::f64::consts::TAU * i as f64 / ntheta as f64)
            .collect();
        Ok(PolarMetricGrid {
            t_grid,
            theta_grid,
            j,
            field: None,
        })
    }

    /// Samples an analytic field and keeps it as generator.
    pub fn from_field(
        field: Arc<dyn MetricField>,
        t_grid: Vec<f64>,
        ntheta: usize,
    ) -> Result<Self> {
        let thetas: Vec<f64> = (0..ntheta)
            .map(|i| std::f64::consts::TAU * i as f64 / ntheta as f64)
            .collect();
        let j = t_grid
            .iter()
            .flat_map(|&t| thetas.iter().map(move |&th| (t, th)))
            .map(|(t, th)| field.value(t, th))
            .collect();
        let mut grid = PolarMetricGrid::new(t_grid, ntheta, j)?;
        grid.field = Some(field);
        Ok(grid)
    }

    pub fn t_grid(&self) -> &[f64] {
        &self.t_grid
    }

    pub fn theta_grid(&self) -> &[f64] {
        &self.theta_grid
    }

    pub fn ntheta(&self) -> usize {
        self.theta_grid.len()
    }

    pub fn j(&self) -> &[f64] {
        &self.j
    }

    pub fn j_at(&self, it: usize, itheta: usize) -> f64 {
        self.j[it * self.ntheta() + itheta]
    }

    pub fn field(&self) -> Option<&Arc<dyn MetricField>> {
        self.field.as_ref()
    }

    /// `∂_t j` on the grid: analytic when a generator is present, otherwise
    /// fourth-order differences along each ray.
    pub fn dt_j(&self) -> Result<Vec<f64>> {
        let (nt, nth) = (self.t_grid.len(), self.ntheta());
        if let Some(f) = &self.field {
            return Ok((0..nt * nth)
                .into_par_iter()
                .map(|idx| f.dt(self.t_grid[idx / nth], self.theta_grid[idx % nth]))
                .collect());
        }
        if nt < 3 {
            return Err(Error::usage(format!(
                "t grid has {nt} points; at least 3 are needed to differentiate"
            )));
        }
        let cols: Vec<Vec<f64>> = (0..nth)
            .into_par_iter()
            .map(|c| {
                let ys: Vec<f64> = (0..nt).map(|i| self.j_at(i, c)).collect();
                crate::numeric::differentiate(&self.t_grid, &ys)
            })
            .collect();
        Ok((0..nt * nth)
            .map(|idx| cols[idx % nth][idx / nth])
            .collect())
    }

    /// CSV with header `t,theta,<value_name>`, row-major by `t`.
    pub fn to_csv(&self, value_name: &str) -> String {
        let mut out = format!("t,theta,{value_name}\n");
        for (i, &t) in self.t_grid.iter().enumerate() {
            for (c, &th) in self.theta_grid.iter().enumerate() {
                writeln!(out, "{t},{th},{}", self.j_at(i, c)).unwrap();
            }
        }
        out
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::parse("empty metric grid file"))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.len() != 3 || cols[0] != "t" || cols[1] != "theta" {
            return Err(Error::parse(format!(
                "metric grid header must be `t,theta,j`, got `{header}`"
            )));
        }
        let mut rows = Vec::new();
        for (n, line) in lines.enumerate() {
            let f: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::parse(format!("metric grid row {}: {e}", n + 1)))?;
            if f.len() != 3 {
                return Err(Error::parse(format!(
                    "metric grid row {} needs 3 fields",
                    n + 1
                )));
            }
            rows.push([f[0], f[1], f[2]]);
        }
        if rows.is_empty() {
            return Err(Error::parse("metric grid has no rows"));
        }
        let ntheta = rows.iter().take_while(|r| r[0] == rows[0][0]).count();
        if rows.len() % ntheta != 0 {
            return Err(Error::parse("metric grid rows do not form a tensor grid"));
        }
        let t_grid: Vec<f64> = rows.iter().step_by(ntheta).map(|r| r[0]).collect();
        for (n, r) in rows.iter().enumerate() {
            let want_theta = std::f64::consts::TAU * (n % ntheta) as f64 / ntheta as f64;
            if r[0] != t_grid[n / ntheta] || (r[1] - want_theta).abs() > 1e-9 {
                return Err(Error::parse(format!(
                    "metric grid row {} breaks the row-major uniform-θ layout",
                    n + 1
                )));
            }
        }
        PolarMetricGrid::new(t_grid, ntheta, rows.iter().map(|r| r[2]).collect())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        PolarMetricGrid::from_csv_str(&std::fs::read_to_string(path)?)
    }
}

/// `½ ∂_t j`, the coefficient of `Hess T` on angular directions.
pub fn hess_t_coefficient(grid: &PolarMetricGrid) -> Result<Vec<f64>> {
    Ok(grid.dt_j()?.into_iter().map(|d| 0.5 * d).collect())
}

fn annulus_rows(grid: &PolarMetricGrid, r1: f64, r2: f64) -> Result<Vec<usize>> {
    if !(0.0 < r1 && r1 < r2) {
        return Err(Error::usage(format!(
            "blend annulus needs 0 < R1 < R2, got {r1}, {r2}"
        )));
    }
    let t = grid.t_grid();
    if t[0] > r1 || *t.last().unwrap() < r2 {
        return Err(Error::usage(format!(
            "t grid [{}, {}] does not cover the annulus [{r1}, {r2}]",
            t[0],
            t.last().unwrap()
        )));
    }
    let rows: Vec<usize> = (0..t.len()).filter(|&i| t[i] >= r1 && t[i] <= r2).collect();
    if rows.is_empty() {
        return Err(Error::usage("no t grid point inside the blend annulus"));
    }
    Ok(rows)
}

/// `c2 = min sinh²t / j` over the grid points of `[R1, R2]`.
pub fn blend_c2(grid: &PolarMetricGrid, r1: f64, r2: f64) -> Result<f64> {
    let mut c2 = f64::INFINITY;
    for i in annulus_rows(grid, r1, r2)? {
        let h1 = hyperbolic_coefficient(1.0, grid.t_grid()[i]);
        for c in 0..grid.ntheta() {
            c2 = c2.min(h1 / grid.j_at(i, c));
        }
    }
    Ok(c2)
}

/// Smallest doubling `k ≤ k_max` with `sinh²(√k R1) ≥ k sinh²(R1)/c2` and
/// `h^{(k)} ≥ j` on the annulus grid, where `c2 = min sinh²t / j` there.
pub fn find_k_blend(grid: &PolarMetricGrid, r1: f64, r2: f64, k_max: f64) -> Result<(f64, f64)> {
    let rows = annulus_rows(grid, r1, r2)?;
    let nth = grid.ntheta();
    let c2 = blend_c2(grid, r1, r2)?;
    let mut k = 1.0;
    let mut violated = String::new();
    while k <= k_max {
        let lhs = (k.sqrt() * r1).sinh().powi(2);
        let rhs = k * r1.sinh().powi(2) / c2;
        if lhs < rhs {
            violated = format!("sinh²(√k R1) = {lhs} < k sinh²(R1)/c2 = {rhs}");
        } else if let Some((i, c)) = rows
            .iter()
            .flat_map(|&i| (0..nth).map(move |c| (i, c)))
            .find(|&(i, c)| hyperbolic_coefficient(k, grid.t_grid()[i]) < grid.j_at(i, c))
        {
            violated = format!(
                "h^(k)(t) < j(t,θ) at t = {}, θ = {}",
                grid.t_grid()[i],
                grid.theta_grid()[c]
            );
        } else {
            return Ok((k, c2));
        }
        k *= 2.0;
    }
    Err(Error::SearchExhausted {
        k_last: k / 2.0,
        violated,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BlendCertificate {
    pub k: f64,
    pub c2: f64,
    pub r1: f64,
    pub r2: f64,
    /// Minimum of `∂_t ĵ` over grid points with `t > 0`.
    pub min_dt_j_hat: f64,
    pub argmin_t: f64,
    pub argmin_theta: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct BlendResult {
    pub k: f64,
    pub c2: f64,
    pub blended: PolarMetricGrid,
    pub phi_j: Vec<f64>,
    pub phi_h: Vec<f64>,
    /// `∂_t ĵ` on the grid, row-major by `t`.
    pub dt_j_hat: Vec<f64>,
    pub certificate: BlendCertificate,
}

/// Forms `ĵ = φ_j j + φ_h h^{(k)}` and certifies `∂_t ĵ > 0`.
pub fn blend_metric(
    grid: &PolarMetricGrid,
    k: f64,
    r1: f64,
    r2: f64,
    c2: f64,
) -> Result<BlendResult> {
    annulus_rows(grid, r1, r2)?;
    if !(k > 0.0) {
        return Err(Error::usage("blend scale k must be positive"));
    }
    let t = grid.t_grid();
    let nth = grid.ntheta();
    let (phi_j, phi_h): (Vec<f64>, Vec<f64>) = t.iter().map(|&s| partition(s, r1, r2)).unzip();
    let dj = grid.dt_j()?;
    let values: Vec<f64> = (0..t.len() * nth)
        .map(|idx| {
            let i = idx / nth;
            phi_j[i] * grid.j()[idx] + phi_h[i] * hyperbolic_coefficient(k, t[i])
        })
        .collect();
    let dt_j_hat: Vec<f64> = (0..t.len() * nth)
        .map(|idx| {
            let i = idx / nth;
            let h = hyperbolic_coefficient(k, t[i]);
            phi_j[i] * dj[idx]
                + phi_h[i] * hyperbolic_coefficient_dt(k, t[i])
                + partition_dt(t[i], r1, r2) * (grid.j()[idx] - h)
        })
        .collect();
    let mut blended = PolarMetricGrid::new(t.to_vec(), nth, values)?;
    if let Some(f) = grid.field() {
        blended.field = Some(Arc::new(BlendedField {
            inner: f.clone(),
            k,
            r1,
            r2,
        }));
    }
    let (mut min, mut at) = (f64::INFINITY, 0);
    for (idx, &d) in dt_j_hat.iter().enumerate() {
        if t[idx / nth] > 0.0 && d < min {
            min = d;
            at = idx;
        }
    }
    let certificate = BlendCertificate {
        k,
        c2,
        r1,
        r2,
        min_dt_j_hat: min,
        argmin_t: t[at / nth],
        argmin_theta: grid.theta_grid()[at % nth],
        pass: min > 0.0,
    };
    Ok(BlendResult {
        k,
        c2,
        blended,
        phi_j,
        phi_h,
        dt_j_hat,
        certificate,
    })
}

/// Integrates the geodesic of `dt² + J dθ²` from `(t, θ)` with initial
/// velocity `(t′, θ′)` by classical RK4 and returns the samples of `t`.
pub fn geodesic_radius_profile(
    field: &dyn MetricField,
    start: [f64; 2],
    velocity: [f64; 2],
    step: f64,
    steps: usize,
) -> Vec<f64> {
    let rhs = |y: [f64; 4]| -> [f64; 4] {
        let [t, th, vt, vth] = y;
        let j = field.value(t, th);
        let jt = field.dt(t, th);
        let jth = field.dtheta(t, th);
        [
            vt,
            vth,
            0.5 * jt * vth * vth,
            -(jt / j) * vt * vth - jth / (2.0 * j) * vth * vth,
        ]
    };
    let mut y = [start[0], start[1], velocity[0], velocity[1]];
    let mut out = Vec::with_capacity(steps + 1);
    out.push(y[0]);
    let add = |a: [f64; 4], b: [f64; 4], s: f64| {
        [
            a[0] + s * b[0],
            a[1] + s * b[1],
            a[2] + s * b[2],
            a[3] + s * b[3],
        ]
    };
    for _ in 0..steps {
        let k1 = rhs(y);
        let k2 = rhs(add(y, k1, 0.5 * step));
        let k3 = rhs(add(y, k2, 0.5 * step));
        let k4 = rhs(add(y, k3, step));
        for m in 0..4 {
            y[m] += step / 6.0 * (k1[m] + 2.0 * k2[m] + 2.0 * k3[m] + k4[m]);
        }
        out.push(y[0]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t_grid(t_max: f64, n: usize) -> Vec<f64> {
        (1..=n).map(|i| t_max * i as f64 / n as f64).collect()
    }

    #[test]
    fn hess_coefficient_examples() {
        let ts = t_grid(3.0, 30);
        let g = PolarMetricGrid::from_field(Arc::new(HyperbolicField { k: 1.0 }), ts.clone(), 4)
            .unwrap();
        let c = hess_t_coefficient(&g).unwrap();
        for (i, &t) in ts.iter().enumerate() {
            assert!((c[i * 4] - t.sinh() * t.cosh()).abs() < 1e-12 * (1.0 + t.sinh() * t.cosh()));
        }
        let flat =
            PolarMetricGrid::new(ts.clone(), 2, ts.iter().flat_map(|t| [t * t; 2]).collect())
                .unwrap();
        let c = hess_t_coefficient(&flat).unwrap();
        for (i, &t) in ts.iter().enumerate() {
            assert!((c[2 * i] - t).abs() < 1e-10);
        }
        let cyl = PolarMetricGrid::new(ts.clone(), 3, vec![2.0; 90]).unwrap();
        assert!(hess_t_coefficient(&cyl)
            .unwrap()
            .iter()
            .all(|v| v.abs() < 1e-12));
        let coarse = PolarMetricGrid::new(vec![1.0, 2.0], 1, vec![1.0, 4.0]).unwrap();
        assert!(matches!(hess_t_coefficient(&coarse), Err(Error::Usage(_))));
    }

    #[test]
    fn hyperbolic_coefficient_examples() {
        let t: f64 = 0.7;
        assert!((hyperbolic_coefficient(1.0, t) - t.sinh().powi(2)).abs() < 1e-15);
        assert!((hyperbolic_coefficient(4.0, 1.0) - 2f64.sinh().powi(2) / 4.0).abs() < 1e-15);
        assert!((hyperbolic_coefficient(4.0, 1.0) - 3.2887).abs() < 1e-3);
        assert_eq!(hyperbolic_coefficient(9.0, 0.0), 0.0);
    }

    #[test]
    fn find_k_flat() {
        let g = PolarMetricGrid::from_field(Arc::new(FlatField), t_grid(3.0, 300), 8).unwrap();
        let (k, c2) = find_k_blend(&g, 1.0, 2.0, 1e12).unwrap();
        assert_eq!(k, 1.0);
        assert!((c2 - 1f64.sinh().powi(2)).abs() < 1e-12);
        let h =
            PolarMetricGrid::from_field(Arc::new(HyperbolicField { k: 1.0 }), t_grid(3.0, 300), 8)
                .unwrap();
        let (k, c2) = find_k_blend(&h, 1.0, 2.0, 1e12).unwrap();
        assert_eq!((k, c2), (1.0, 1.0));
    }

    #[test]
    fn find_k_exponential() {
        let g = PolarMetricGrid::from_field(Arc::new(ExpField { rate: 10.0 }), t_grid(3.0, 300), 4)
            .unwrap();
        let (k, c2) = find_k_blend(&g, 1.0, 2.0, 1e12).unwrap();
        assert!(k > 1.0);
        assert!((k.sqrt()).sinh().powi(2) >= k * 1f64.sinh().powi(2) / c2);
        for (i, &t) in g.t_grid().iter().enumerate() {
            if (1.0..=2.0).contains(&t) {
                assert!(hyperbolic_coefficient(k, t) >= g.j_at(i, 0));
            }
        }
        // the previous doubling must fail one of the two conditions
        let kp = k / 2.0;
        let first = (kp.sqrt()).sinh().powi(2) >= kp * 1f64.sinh().powi(2) / c2;
        let second = g
            .t_grid()
            .iter()
            .enumerate()
            .filter(|(_, t)| (1.0..=2.0).contains(*t))
            .all(|(i, &t)| hyperbolic_coefficient(kp, t) >= g.j_at(i, 0));
        assert!(!(first && second));
    }

    #[test]
    fn self_blend_is_identity() {
        let g =
            PolarMetricGrid::from_field(Arc::new(HyperbolicField { k: 1.0 }), t_grid(3.0, 200), 16)
                .unwrap();
        let res = blend_metric(&g, 1.0, 1.0, 2.0, 1.0).unwrap();
        for (a, b) in res.blended.j().iter().zip(g.j()) {
            assert!((a - b).abs() <= 1e-14 * b);
        }
        assert!(res.certificate.pass);
        assert_eq!(res.certificate.argmin_t, g.t_grid()[0]);
    }

    #[test]
    fn flat_blend_passes_and_ends_are_exact() {
        let g = PolarMetricGrid::from_field(Arc::new(FlatField), t_grid(3.0, 200), 64).unwrap();
        let res = blend_metric(&g, 1.0, 1.0, 2.0, 1f64.sinh().powi(2)).unwrap();
        assert!(res.certificate.pass);
        for (i, &t) in g.t_grid().iter().enumerate() {
            assert_eq!(res.phi_j[i] + res.phi_h[i], 1.0);
            for c in 0..64 {
                let v = res.blended.j_at(i, c);
                if t <= 1.0 {
                    assert_eq!(v, g.j_at(i, c));
                }
                if t >= 2.0 {
                    assert_eq!(v, hyperbolic_coefficient(1.0, t));
                }
            }
        }
    }

    #[test]
    fn adversarial_blend_fails() {
        let big = PolarMetricGrid::new(
            t_grid(3.0, 200),
            8,
            t_grid(3.0, 200)
                .iter()
                .flat_map(|t| [100.0 * t * t; 8])
                .collect(),
        )
        .unwrap();
        let res = blend_metric(&big, 1.0, 1.0, 2.0, 0.01).unwrap();
        assert!(!res.certificate.pass);
        assert!(res.certificate.min_dt_j_hat < 0.0);
    }

    #[test]
    fn partition_is_monotone() {
        let mut prev = 1.0;
        for i in 0..=1000 {
            let t = 0.5 + 2.0 * i as f64 / 1000.0;
            let (pj, _) = partition(t, 1.0, 2.0);
            assert!(pj <= prev);
            assert!(partition_dt(t, 1.0, 2.0) <= 0.0);
            prev = pj;
        }
    }

    #[test]
    fn csv_round_trip() {
        let g = PolarMetricGrid::from_field(Arc::new(FlatField), t_grid(2.0, 5), 3).unwrap();
        let back = PolarMetricGrid::from_csv_str(&g.to_csv("j")).unwrap();
        assert_eq!(back.j(), g.j());
        assert_eq!(back.t_grid(), g.t_grid());
        assert!(PolarMetricGrid::from_csv_str("t,theta,j\n1,0,-1\n").is_err());
    }
}
