//! Convex surgery of warping functions.
//!
//! Given a Cartan–Hadamard warp `ρ` and a hyperbolic-type warp `σ`, build a
//! warp `τ` that equals `ρ` up to `R1 − δ`, equals a rescaling `σ_k` (up to
//! an integration constant fixed by root-finding) beyond `R2 + δ`, and is
//! convex with `τ′ ≥ 1` everywhere. The derivative profile is
//!
//! ```text
//! τ′ = ρ′                      on [0, R1−δ]
//!      linear ρ′(R1−δ) → s     on [R1−δ, R1+δ]
//!      s                       on [R1+δ, R2−δ]
//!      linear s → σ_k′(R2+δ)   on [R2−δ, R2+δ]
//!      σ_k′                    beyond
//! ```
//!
//! so `τ` is `C^{1,1}` with piecewise-constant `τ″` inside the bands.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::warp::{
    is_cartan_hadamard, is_hyperbolic_type, scale_k, CurvatureReport, SampledWarp, Warp, WarpJet,
    WarpingFunction,
};

/// Inputs of the gluing pipeline.
#[derive(Debug, Clone)]
pub struct GlueSpec {
    pub rho: WarpingFunction,
    pub sigma: WarpingFunction,
    /// Radius of the protected ball.
    pub r_bar: f64,
    /// Radius beyond which the surgery is complete.
    pub r_outer: f64,
    /// Band half-width; `None` picks `min(0.05, (R2−R1)/10)`.
    pub delta: Option<f64>,
    pub k_max: f64,
    pub value_tol: f64,
}

impl GlueSpec {
    pub fn new(rho: WarpingFunction, sigma: WarpingFunction, r_bar: f64, r_outer: f64) -> Self {
        GlueSpec {
            rho,
            sigma,
            r_bar,
            r_outer,
            delta: None,
            k_max: 1e6,
            value_tol: 1e-10,
        }
    }

    /// Checks the spec and returns `(R1, R2, δ)`.
    pub fn validate(&self) -> Result<(f64, f64, f64)> {
        let (r1, r2) = choose_radii(self.r_bar, self.r_outer)?;
        let delta = self.delta.unwrap_or_else(|| default_delta(r1, r2));
        if !(delta > 0.0 && delta < (self.r_outer - self.r_bar) / 8.0) {
            return Err(Error::usage(format!(
                "band half-width δ = {delta} must satisfy 0 < δ < (R − R̄)/8"
            )));
        }
        if !(2.0 * delta < r2 - r1) || !(delta < r1) {
            return Err(Error::usage(format!(
                "band half-width δ = {delta} overlaps the plateau or the pole"
            )));
        }
        if !(self.k_max >= 1.0) {
            return Err(Error::usage("k_max must be ≥ 1"));
        }
        if !(self.value_tol > 0.0) {
            return Err(Error::usage("value_tol must be > 0"));
        }
        let hyp = is_hyperbolic_type(
            &self.sigma,
            &crate::warp::default_check_grid(),
            &crate::warp::default_k_list(),
        )?;
        if !hyp.is_hyperbolic_type {
            return Err(Error::usage(format!(
                "outer warp {} is not of hyperbolic type: {}",
                self.sigma,
                hyp.first_failure.unwrap_or_default()
            )));
        }
        Ok((r1, r2, delta))
    }
}

/// `min(0.05, (R2−R1)/10)`.
pub fn default_delta(r1: f64, r2: f64) -> f64 {
    0.05f64.min((r2 - r1) / 10.0)
}

/// `R1 = R̄ + (R−R̄)/3`, `R2 = R̄ + 2(R−R̄)/3`.
pub fn choose_radii(r_bar: f64, r_outer: f64) -> Result<(f64, f64)> {
    if !(r_bar > 0.0) || !(r_outer > r_bar) || !r_outer.is_finite() {
        return Err(Error::usage(format!(
            "gluing radii must satisfy 0 < R̄ < R, got R̄ = {r_bar}, R = {r_outer}"
        )));
    }
    let gap = r_outer - r_bar;
    Ok((r_bar + gap / 3.0, r_bar + 2.0 * gap / 3.0))
}

/// Plateau slope bracket and the target value at `R2 + δ` for a given `σ_k`.
struct Bracket {
    lo: f64,
    hi: f64,
    head_value: f64,
    target: f64,
}

fn bracket<R: Warp + ?Sized, S: Warp + ?Sized>(
    rho: &R,
    sigma_k: &S,
    r1: f64,
    r2: f64,
    delta: f64,
) -> Result<Bracket> {
    let head = rho.jet(r1 - delta)?;
    let tail = sigma_k.jet(r2 + delta)?;
    Ok(Bracket {
        lo: head.d1,
        hi: tail.d1,
        head_value: head.value,
        target: tail.value,
    })
}

/// `τ(R2+δ)` as a function of the plateau slope `s`.
fn end_value(b: &Bracket, r1: f64, r2: f64, delta: f64, s: f64) -> f64 {
    b.head_value + delta * (b.lo + s) + s * (r2 - r1 - 2.0 * delta) + delta * (s + b.hi)
}

/// Checks the δ-shifted form of
/// `ρ′(R1) ≤ (σ_k(R2) − ρ(R1))/(R2 − R1) ≤ σ_k′(R2)` together with the
/// existence of a plateau slope in `[ρ′(R1−δ), σ_k′(R2+δ)]`.
/// Returns the violated inequality on failure.
pub fn feasibility<R: Warp + ?Sized, S: Warp + ?Sized>(
    rho: &R,
    sigma_k: &S,
    r1: f64,
    r2: f64,
    delta: f64,
) -> Result<std::result::Result<(), String>> {
    let rho_in = rho.jet(r1 + delta)?;
    let rho_out = rho.jet(r1 - delta)?;
    let sk_end = sigma_k.jet(r2 + delta)?;
    let sk_in = sigma_k.jet(r2 - delta)?;
    let quotient =
        (sk_end.value - rho_out.value - 2.0 * delta * rho_in.d1) / ((r2 - delta) - (r1 + delta));
    if !(rho_in.d1 <= quotient) {
        return Ok(Err(format!(
            "ρ′(R1+δ) = {} > secant quotient {quotient}",
            rho_in.d1
        )));
    }
    if !(quotient <= sk_in.d1) {
        return Ok(Err(format!(
            "secant quotient {quotient} > σ_k′(R2−δ) = {}",
            sk_in.d1
        )));
    }
    let b = bracket(rho, sigma_k, r1, r2, delta)?;
    if end_value(&b, r1, r2, delta, b.lo) > b.target {
        return Ok(Err(format!(
            "plateau slope below ρ′(R1−δ) = {} would be required",
            b.lo
        )));
    }
    if end_value(&b, r1, r2, delta, b.hi) < b.target {
        return Ok(Err(format!(
            "plateau slope above σ_k′(R2+δ) = {} would be required",
            b.hi
        )));
    }
    Ok(Ok(()))
}

/// Smallest `k ∈ {1, 2, 4, …} ≤ k_max` satisfying [`feasibility`].
pub fn find_k<R: Warp + ?Sized>(
    rho: &R,
    sigma: &WarpingFunction,
    r1: f64,
    r2: f64,
    delta: f64,
    k_max: f64,
) -> Result<f64> {
    if !(r1 < r2) || !(delta >= 0.0) || !(r1 - delta >= 0.0) {
        return Err(Error::usage(format!(
            "find_k needs 0 ≤ R1 − δ and R1 < R2 (R1 = {r1}, R2 = {r2}, δ = {delta})"
        )));
    }
    let mut k = 1.0;
    let mut last = String::from("no scale tried");
    while k <= k_max {
        let sk = scale_k(sigma, k)?;
        match feasibility(rho, &sk, r1, r2, delta)? {
            Ok(()) => return Ok(k),
            Err(why) => last = why,
        }
        k *= 2.0;
    }
    Err(Error::SearchExhausted {
        k_last: k / 2.0,
        violated: last,
    })
}

/// The glued warping function `τ`.
#[derive(Debug, Clone)]
pub struct GluedWarp {
    pub rho: WarpingFunction,
    pub sigma_k: WarpingFunction,
    pub r1: f64,
    pub r2: f64,
    pub delta: f64,
    pub k: f64,
    /// Plateau slope.
    pub s: f64,
    start_slope: f64,
    start_value: f64,
    end_slope: f64,
    /// `σ_k(R2+δ)` at construction.
    end_anchor: f64,
}

impl GluedWarp {
    /// Band edges `R1 − δ, R1 + δ, R2 − δ, R2 + δ`.
    pub fn band_edges(&self) -> [f64; 4] {
        [
            self.r1 - self.delta,
            self.r1 + self.delta,
            self.r2 - self.delta,
            self.r2 + self.delta,
        ]
    }

    /// Same warp with a different plateau slope and no re-matching; used to
    /// exercise the certificate.
    pub fn with_plateau_slope(&self, s: f64) -> GluedWarp {
        GluedWarp { s, ..self.clone() }
    }

    fn plateau_start(&self) -> f64 {
        self.start_value + self.delta * (self.start_slope + self.s)
    }

    fn ramp_start(&self) -> f64 {
        self.plateau_start() + self.s * (self.r2 - self.r1 - 2.0 * self.delta)
    }

    /// `τ(R2+δ)`.
    pub fn end_value(&self) -> f64 {
        self.ramp_start() + self.delta * (self.s + self.end_slope)
    }

    /// `(τ(x1) − τ(x0))/(x1 − x0)` for `x0 < x1`. Inside the ramps and the
    /// plateau this is evaluated in closed form, so large plateau slopes do
    /// not turn into cancellation noise; elsewhere it is a value difference
    /// of `ρ` or `σ_k` alone.
    pub fn secant_slope(&self, x0: f64, x1: f64) -> Result<f64> {
        let [a, b, c, d] = self.band_edges();
        let two_delta = 2.0 * self.delta;
        let diff = |w: &WarpingFunction| -> Result<f64> {
            Ok((w.jet(x1)?.value - w.jet(x0)?.value) / (x1 - x0))
        };
        if x1 <= a {
            return diff(&self.rho);
        }
        if x0 >= d {
            return diff(&self.sigma_k);
        }
        if x0 >= a && x1 <= b {
            let curv = (self.s - self.start_slope) / two_delta;
            return Ok(self.start_slope + 0.5 * curv * ((x0 - a) + (x1 - a)));
        }
        if x0 >= b && x1 <= c {
            return Ok(self.s);
        }
        if x0 >= c && x1 <= d {
            let curv = (self.end_slope - self.s) / two_delta;
            return Ok(self.s + 0.5 * curv * ((x0 - c) + (x1 - c)));
        }
        Ok((self.jet(x1)?.value - self.jet(x0)?.value) / (x1 - x0))
    }

    /// Samples `τ` on `radii` into a warp sample file, tail continued by `σ_k`.
    pub fn to_sampled(&self, radii: &[f64]) -> Result<SampledWarp> {
        Ok(
            SampledWarp::sample(self, radii)?.with_tail(crate::warp::SplineTail::Analytic(
                Box::new(self.sigma_k.clone()),
            )),
        )
    }
}

impl Warp for GluedWarp {
    fn jet(&self, r: f64) -> Result<WarpJet> {
        let [a, b, c, d] = self.band_edges();
        if r <= a {
            return self.rho.jet(r);
        }
        let two_delta = 2.0 * self.delta;
        if r <= b {
            let x = r - a;
            let curv = (self.s - self.start_slope) / two_delta;
            return Ok(WarpJet::new(
                self.start_value + self.start_slope * x + 0.5 * curv * x * x,
                self.start_slope + curv * x,
                curv,
            ));
        }
        if r <= c {
            return Ok(WarpJet::new(
                self.plateau_start() + self.s * (r - b),
                self.s,
                0.0,
            ));
        }
        if r <= d {
            let x = r - c;
            let curv = (self.end_slope - self.s) / two_delta;
            return Ok(WarpJet::new(
                self.ramp_start() + self.s * x + 0.5 * curv * x * x,
                self.s + curv * x,
                curv,
            ));
        }
        let j = self.sigma_k.jet(r)?;
        Ok(WarpJet::new(
            self.end_value() + (j.value - self.end_anchor),
            j.d1,
            j.d2,
        ))
    }

    fn slope_excess(&self, r: f64) -> Result<f64> {
        let [a, _, _, d] = self.band_edges();
        if r <= a {
            self.rho.slope_excess(r)
        } else if r > d {
            self.sigma_k.slope_excess(r)
        } else {
            Ok(self.jet(r)?.d1 - 1.0)
        }
    }

    fn pole_third_derivative(&self) -> Option<f64> {
        self.rho.pole_third_derivative()
    }
}

/// Builds `τ`, solving for the plateau slope `s` by bisection on the
/// strictly increasing map `s ↦ τ(R2+δ; s) − σ_k(R2+δ)`.
pub fn build_tau(
    rho: &WarpingFunction,
    sigma_k: &WarpingFunction,
    r1: f64,
    r2: f64,
    delta: f64,
    k: f64,
    value_tol: f64,
) -> Result<GluedWarp> {
    if !(delta > 0.0) || !(r1 - delta > 0.0) || !(r2 - r1 > 2.0 * delta) {
        return Err(Error::usage(format!(
            "bands [R1±δ], [R2±δ] must lie in (0, ∞) without overlapping (R1 = {r1}, R2 = {r2}, δ = {delta})"
        )));
    }
    let b = bracket(rho, sigma_k, r1, r2, delta)?;
    if !(b.lo <= b.hi) {
        return Err(Error::Construction(format!(
            "τ′ would decrease: ρ′(R1−δ) = {} > σ_k′(R2+δ) = {}",
            b.lo, b.hi
        )));
    }
    let residual = |s: f64| end_value(&b, r1, r2, delta, s) - b.target;
    let tiny = 1e-12 * (1.0 + b.target.abs());
    let (f_lo, f_hi) = (residual(b.lo), residual(b.hi));
    let s = if f_lo.abs() <= tiny {
        b.lo
    } else if f_hi.abs() <= tiny {
        b.hi
    } else if f_lo > 0.0 || f_hi < 0.0 {
        return Err(Error::Infeasible(format!(
            "plateau slope root not bracketed in [{}, {}] (residuals {f_lo}, {f_hi})",
            b.lo, b.hi
        )));
    } else {
        let (mut lo, mut hi) = (b.lo, b.hi);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let f = residual(mid);
            if f == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if f < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if residual(lo).abs() <= residual(hi).abs() {
            lo
        } else {
            hi
        }
    };
    let gw = GluedWarp {
        rho: rho.clone(),
        sigma_k: sigma_k.clone(),
        r1,
        r2,
        delta,
        k,
        s,
        start_slope: b.lo,
        start_value: b.head_value,
        end_slope: b.hi,
        end_anchor: b.target,
    };
    let mismatch = (gw.end_value() - b.target).abs();
    if mismatch > value_tol * b.target.abs().max(1.0) {
        return Err(Error::Infeasible(format!(
            "tail mismatch {mismatch} exceeds value_tol {value_tol} (relative to max(1, |σ_k(R2+δ)|)) after bisection"
        )));
    }
    Ok(gw)
}

/// Machine-checkable evidence for a glued warp.
#[derive(Debug, Clone, Serialize)]
pub struct GlueCertificate {
    pub r1: f64,
    pub r2: f64,
    pub delta: f64,
    pub k: f64,
    pub s: f64,
    pub grid_points: usize,
    /// Minimum over the grid of `(τ_{i+1}−τ_i)/h_{i+1} − (τ_i−τ_{i−1})/h_i`.
    pub min_second_difference: f64,
    /// Minimum over the grid of `τ′ − 1`.
    pub min_slope_minus_one: f64,
    pub head_mismatch: f64,
    pub tail_mismatch: f64,
    /// `max(1, sup |σ_k|)` over the tail grid points; the tail mismatch is
    /// accepted up to `value_tol` times this, since one ulp of a large tail
    /// value already exceeds a small absolute tolerance.
    pub tail_scale: f64,
    pub max_curvature: f64,
    pub curvature_nonpositive: bool,
    pub pass: bool,
    #[serde(skip)]
    pub curvature: Option<CurvatureReport>,
}

pub const SECOND_DIFFERENCE_TOL: f64 = 1e-9;
pub const SLOPE_TOL: f64 = 1e-12;
pub const CURVATURE_TOL: f64 = 1e-9;

/// Uniform grid of `n` points on `[0, R2+4δ]` merged with the band edges.
pub fn certification_grid(gw: &GluedWarp, n: usize) -> Vec<f64> {
    let end = gw.r2 + 4.0 * gw.delta;
    let h = end / (n - 1) as f64;
    let edges = gw.band_edges();
    // Uniform nodes hugging a band edge would make slope differences
    // dominated by rounding, so they give way to the edge itself.
    let mut grid: Vec<f64> = (0..n)
        .map(|i| end * i as f64 / (n - 1) as f64)
        .filter(|&r| r == 0.0 || r == end || edges.iter().all(|e| (r - e).abs() >= 0.25 * h))
        .collect();
    grid.extend_from_slice(&edges);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

pub fn certify(gw: &GluedWarp, grid: &[f64], value_tol: f64) -> Result<GlueCertificate> {
    let end = gw.r2 + 4.0 * gw.delta;
    if grid.len() < 2000 {
        return Err(Error::usage(format!(
            "certification grid has {} points; at least 2000 required",
            grid.len()
        )));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::usage(
            "certification grid must be strictly increasing",
        ));
    }
    if grid[0] > 0.0 || *grid.last().unwrap() < end - 1e-12 {
        return Err(Error::usage(format!(
            "certification grid must span [0, R2+4δ] = [0, {end}]"
        )));
    }
    for e in gw.band_edges() {
        if !grid.iter().any(|&r| (r - e).abs() <= 1e-14) {
            return Err(Error::usage(format!(
                "certification grid misses band edge {e}"
            )));
        }
    }
    let [head_end, _, _, tail_start] = gw.band_edges();
    let mut min_slope_minus_one = f64::INFINITY;
    let mut head_mismatch: f64 = 0.0;
    let mut tail_mismatch: f64 = 0.0;
    let mut tail_scale: f64 = 1.0;
    for &r in grid {
        let j = gw.jet(r)?;
        min_slope_minus_one = min_slope_minus_one.min(gw.slope_excess(r)?);
        if r <= head_end {
            head_mismatch = head_mismatch.max((j.value - gw.rho.jet(r)?.value).abs());
        }
        if r >= tail_start {
            let target = gw.sigma_k.jet(r)?.value;
            tail_mismatch = tail_mismatch.max((j.value - target).abs());
            tail_scale = tail_scale.max(target.abs());
        }
    }
    let slopes = grid
        .windows(2)
        .map(|w| gw.secant_slope(w[0], w[1]))
        .collect::<Result<Vec<_>>>()?;
    let min_second_difference = slopes
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let positive: Vec<f64> = grid.iter().copied().filter(|&r| r > 0.0).collect();
    let curvature = is_cartan_hadamard(gw, &positive)?;
    let max_curvature = curvature
        .sec_rad
        .iter()
        .chain(&curvature.sec_tg)
        .fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let curvature_nonpositive = curvature.is_nonpositive && max_curvature <= CURVATURE_TOL;
    let pass = min_second_difference >= -SECOND_DIFFERENCE_TOL
        && min_slope_minus_one >= -SLOPE_TOL
        && head_mismatch == 0.0
        && tail_mismatch <= value_tol * tail_scale
        && curvature_nonpositive;
    Ok(GlueCertificate {
        r1: gw.r1,
        r2: gw.r2,
        delta: gw.delta,
        k: gw.k,
        s: gw.s,
        grid_points: grid.len(),
        min_second_difference,
        min_slope_minus_one,
        head_mismatch,
        tail_mismatch,
        tail_scale,
        max_curvature,
        curvature_nonpositive,
        pass,
        curvature: Some(curvature),
    })
}

/// Full pipeline: radii, scale search, construction and certificate on a
/// 4000-point grid.
pub fn glue(spec: &GlueSpec) -> Result<(GluedWarp, GlueCertificate)> {
    let (r1, r2, delta) = spec.validate()?;
    let k = find_k(&spec.rho, &spec.sigma, r1, r2, delta, spec.k_max)?;
    let sigma_k = scale_k(&spec.sigma, k)?;
    let gw = build_tau(&spec.rho, &sigma_k, r1, r2, delta, k, spec.value_tol)?;
    let grid = certification_grid(&gw, 4000);
    let cert = certify(&gw, &grid, spec.value_tol)?;
    Ok((gw, cert))
}

/// One warping function per ray `θ_i` of a two-dimensional
/// Cartan–Hadamard metric `dr² + ν(r,θ)² dθ²`.
#[derive(Debug, Clone)]
pub struct RayFamily {
    pub thetas: Vec<f64>,
    pub rays: Vec<WarpingFunction>,
}

impl RayFamily {
    pub fn new(thetas: Vec<f64>, rays: Vec<WarpingFunction>) -> Result<Self> {
        if thetas.len() != rays.len() || thetas.len() < 3 {
            return Err(Error::usage("ray family needs ≥ 3 rays, one angle per ray"));
        }
        Ok(RayFamily { thetas, rays })
    }

    /// Uniform angles on `[0, 2π)` with `ray(θ)` supplying each warp.
    pub fn from_fn(
        ntheta: usize,
        mut ray: impl FnMut(f64) -> Result<WarpingFunction>,
    ) -> Result<Self> {
        let thetas: Vec<f64> = (0..ntheta)
            .map(|i| std::f64::consts::TAU * i as f64 / ntheta as f64)
            .collect();
        let rays = thetas.iter().map(|&t| ray(t)).collect::<Result<Vec<_>>>()?;
        RayFamily::new(thetas, rays)
    }

    /// Rays `ν = √j` of a sampled polar metric; derivatives by finite
    /// differences along `t`, with the pole knot `(0, 0, 1, 0)` prepended.
    pub fn from_polar_grid(grid: &crate::blend::PolarMetricGrid) -> Result<Self> {
        let t = grid.t_grid();
        let mut knots = vec![0.0];
        knots.extend_from_slice(t);
        let mut rays = Vec::with_capacity(grid.ntheta());
        for col in 0..grid.ntheta() {
            let mut nu = vec![0.0];
            nu.extend((0..t.len()).map(|i| grid.j_at(i, col).sqrt()));
            let d1 = crate::numeric::differentiate(&knots, &nu);
            let d2 = crate::numeric::differentiate(&knots, &d1);
            let mut d1 = d1;
            d1[0] = 1.0;
            rays.push(WarpingFunction::SampledSpline(SampledWarp::new(
                knots.clone(),
                nu,
                d1,
                d2,
            )?));
        }
        RayFamily::new(grid.theta_grid().to_vec(), rays)
    }
}

/// Per-ray gluing with shared `(k, R1, R2, δ)`.
#[derive(Debug, Clone, Serialize)]
pub struct GlueFamily {
    pub k: f64,
    pub r1: f64,
    pub r2: f64,
    pub delta: f64,
    pub slopes: Vec<f64>,
    /// `max |s(θ_{i+1}) − s(θ_i)| / Δθ`, periodic.
    pub lipschitz: f64,
    /// Bound on `lipschitz` implied by the variation of the ray data at `R1 − δ`.
    pub data_lipschitz: f64,
    pub continuous: bool,
    pub pass: bool,
    pub certificates: Vec<GlueCertificate>,
    #[serde(skip)]
    pub rays: Vec<GluedWarp>,
}

#[allow(clippy::too_many_arguments)]
pub fn glue2d(
    family: &RayFamily,
    sigma: &WarpingFunction,
    r_bar: f64,
    r_outer: f64,
    delta: Option<f64>,
    k_max: f64,
    value_tol: f64,
    ray_grid: &[f64],
) -> Result<GlueFamily> {
    let (r1, r2) = choose_radii(r_bar, r_outer)?;
    let delta = delta.unwrap_or_else(|| default_delta(r1, r2));
    for (i, ray) in family.rays.iter().enumerate() {
        let rep = is_cartan_hadamard(ray, ray_grid)?;
        if !rep.is_nonpositive {
            return Err(Error::usage(format!(
                "ray {i} (θ = {}) has ∂²ν/∂r² < 0 on its grid; the metric is not Cartan–Hadamard",
                family.thetas[i]
            )));
        }
    }
    let mut k = 1.0;
    let mut worst: Option<(usize, String)> = None;
    let k = loop {
        if k > k_max {
            let (i, why) = worst.unwrap_or((0, String::new()));
            return Err(Error::SearchExhausted {
                k_last: k / 2.0,
                violated: format!("worst ray {i} (θ = {}): {why}", family.thetas[i]),
            });
        }
        let sk = scale_k(sigma, k)?;
        let failures: Vec<(usize, String)> = family
            .rays
            .par_iter()
            .enumerate()
            .map(|(i, ray)| feasibility(ray, &sk, r1, r2, delta).map(|f| f.err().map(|w| (i, w))))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        match failures.into_iter().next() {
            None => break k,
            Some(f) => worst = Some(f),
        }
        k *= 2.0;
    };
    let sigma_k = scale_k(sigma, k)?;
    let rays: Vec<GluedWarp> = family
        .rays
        .par_iter()
        .map(|ray| build_tau(ray, &sigma_k, r1, r2, delta, k, value_tol))
        .collect::<Result<_>>()?;
    let certificates: Vec<GlueCertificate> = rays
        .par_iter()
        .map(|gw| certify(gw, &certification_grid(gw, 2000), value_tol))
        .collect::<Result<_>>()?;
    let slopes: Vec<f64> = rays.iter().map(|g| g.s).collect();
    let n = slopes.len();
    let mut lipschitz: f64 = 0.0;
    let mut data_lipschitz: f64 = 0.0;
    for i in 0..n {
        let j = (i + 1) % n;
        let dtheta = if j == 0 {
            std::f64::consts::TAU - family.thetas[i] + family.thetas[0]
        } else {
            family.thetas[j] - family.thetas[i]
        };
        lipschitz = lipschitz.max((slopes[j] - slopes[i]).abs() / dtheta);
        let (a, b) = (&rays[i], &rays[j]);
        let dv = (a.start_value - b.start_value).abs();
        let ds = (a.start_slope - b.start_slope).abs();
        data_lipschitz = data_lipschitz.max((dv + delta * ds) / (r2 - r1) / dtheta);
    }
    let continuous = lipschitz <= data_lipschitz * (1.0 + 1e-6) + 1e-9;
    let pass = continuous && certificates.iter().all(|c| c.pass);
    Ok(GlueFamily {
        k,
        r1,
        r2,
        delta,
        slopes,
        lipschitz,
        data_lipschitz,
        continuous,
        pass,
        certificates,
        rays,
    })
}
