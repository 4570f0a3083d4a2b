//! Warping functions `σ` and the model manifolds `N^n_σ = ([0,∞) × S^{n-1}, dr² + σ(r)² dθ²)`.
//!
//! Every warp is evaluated as a jet `(σ, σ′, σ″)`. Radial and tangential
//! sectional curvatures follow from the warped-product formulas
//!
//! ```text
//! sec_rad = −σ″ / σ        sec_tg = (1 − σ′²) / σ²
//! ```
//!
//! and the model is Cartan–Hadamard iff `σ″ ≥ 0`.

use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::sign_tol;

/// Value and first two derivatives of a warping function at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpJet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl WarpJet {
    pub fn new(value: f64, d1: f64, d2: f64) -> Self {
        WarpJet { value, d1, d2 }
    }
}

/// Anything that behaves like a warping function.
pub trait Warp {
    fn jet(&self, r: f64) -> Result<WarpJet>;

    /// `σ′(r) − 1`, computed without cancellation where the kind allows it.
    fn slope_excess(&self, r: f64) -> Result<f64> {
        Ok(self.jet(r)?.d1 - 1.0)
    }

    /// `σ‴(0)` for kinds with an analytic pole limit.
    fn pole_third_derivative(&self) -> Option<f64>;
}

/// Odd polynomial `Σ c_i r^{2i+1}` with `c_0 = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct OddPolynomial {
    coeffs: Vec<f64>,
}

impl OddPolynomial {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs[0] != 1.0 {
            return Err(Error::usage(
                "odd polynomial warp must have leading coefficient 1 on r (σ′(0) = 1)",
            ));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::usage("odd polynomial coefficients must be finite"));
        }
        Ok(OddPolynomial { coeffs })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }
}

/// Behaviour of a sampled warp past its last knot.
#[derive(Debug, Clone, PartialEq)]
pub enum SplineTail {
    /// Second-order Taylor continuation from the last knot.
    Taylor,
    /// `σ(r) = w(r) + offset`, with `offset` fixed so values match at the last knot.
    Analytic(Box<WarpingFunction>),
}

/// Piecewise cubic Hermite interpolant of `(σ, σ′)` knots.
///
/// The knot second derivatives are kept for file round-trips and the
/// Taylor tail; inside the knot range `σ″` is the (piecewise linear)
/// second derivative of the Hermite cubic, so its sign on an interval is
/// certified by its two endpoint values.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledWarp {
    radii: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    curvatures: Vec<f64>,
    head: Option<Box<WarpingFunction>>,
    tail: SplineTail,
}

impl SampledWarp {
    pub fn new(
        radii: Vec<f64>,
        values: Vec<f64>,
        slopes: Vec<f64>,
        curvatures: Vec<f64>,
    ) -> Result<Self> {
        let n = radii.len();
        if n < 2 {
            return Err(Error::usage("sampled warp needs at least two knots"));
        }
        if values.len() != n || slopes.len() != n || curvatures.len() != n {
            return Err(Error::usage("sampled warp columns have different lengths"));
        }
        if radii[0] < 0.0 {
            return Err(Error::usage("sampled warp radii must be non-negative"));
        }
        if radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::usage(
                "sampled warp radii must be strictly increasing",
            ));
        }
        let all = radii
            .iter()
            .chain(&values)
            .chain(&slopes)
            .chain(&curvatures);
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::usage("sampled warp contains non-finite entries"));
        }
        Ok(SampledWarp {
            radii,
            values,
            slopes,
            curvatures,
            head: None,
            tail: SplineTail::Taylor,
        })
    }

    /// Samples `w` at `radii`.
    pub fn sample<W: Warp + ?Sized>(w: &W, radii: &[f64]) -> Result<Self> {
        let mut values = Vec::with_capacity(radii.len());
        let mut slopes = Vec::with_capacity(radii.len());
        let mut curvatures = Vec::with_capacity(radii.len());
        for &r in radii {
            let j = w.jet(r)?;
            values.push(j.value);
            slopes.push(j.d1);
            curvatures.push(j.d2);
        }
        SampledWarp::new(radii.to_vec(), values, slopes, curvatures)
    }

    pub fn with_head(mut self, head: WarpingFunction) -> Self {
        self.head = Some(Box::new(head));
        self
    }

    pub fn with_tail(mut self, tail: SplineTail) -> Self {
        self.tail = tail;
        self
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn knot_curvatures(&self) -> &[f64] {
        &self.curvatures
    }

    /// Third derivative of the interpolant on the first interval; the
    /// interpolant's own value for `σ‴` near the first knot.
    pub fn first_interval_third(&self) -> f64 {
        let h = self.radii[1] - self.radii[0];
        let (y0, y1) = (self.values[0], self.values[1]);
        let (m0, m1) = (self.slopes[0], self.slopes[1]);
        12.0 * (y0 - y1) / h.powi(3) + 6.0 * (m0 + m1) / (h * h)
    }

    fn eval(&self, r: f64) -> Result<WarpJet> {
        let n = self.radii.len();
        let (first, last) = (self.radii[0], self.radii[n - 1]);
        if r < first {
            return match &self.head {
                Some(head) => head.jet(r),
                None => Err(Error::domain(format!(
                    "sampled warp evaluated at r = {r} below its first knot {first} with no analytic head"
                ))),
            };
        }
        if r > last {
            let (y, m, c) = (
                self.values[n - 1],
                self.slopes[n - 1],
                self.curvatures[n - 1],
            );
            return match &self.tail {
                SplineTail::Taylor => {
                    let x = r - last;
                    Ok(WarpJet::new(y + m * x + 0.5 * c * x * x, m + c * x, c))
                }
                SplineTail::Analytic(w) => {
                    let offset = y - w.jet(last)?.value;
                    let j = w.jet(r)?;
                    Ok(WarpJet::new(j.value + offset, j.d1, j.d2))
                }
            };
        }
        let i = self.radii.partition_point(|&x| x <= r).clamp(1, n - 1) - 1;
        let (x0, x1) = (self.radii[i], self.radii[i + 1]);
        let h = x1 - x0;
        let t = (r - x0) / h;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i], self.slopes[i + 1]);
        let t2 = t * t;
        let t3 = t2 * t;
        let value = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * h * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * h * m1;
        let d1 = (6.0 * t2 - 6.0 * t) * (y0 - y1) / h
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (3.0 * t2 - 2.0 * t) * m1;
        let d2 = (12.0 * t - 6.0) * (y0 - y1) / (h * h)
            + ((6.0 * t - 4.0) * m0 + (6.0 * t - 2.0) * m1) / h;
        Ok(WarpJet::new(value, d1, d2))
    }

    /// Parses the `r,sigma,dsigma,ddsigma` CSV format.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::parse("warp sample file is empty"))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols != ["r", "sigma", "dsigma", "ddsigma"] {
            return Err(Error::parse(format!(
                "warp sample header must be `r,sigma,dsigma,ddsigma`, got `{header}`"
            )));
        }
        let mut cols: [Vec<f64>; 4] = Default::default();
        for (lineno, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(Error::parse(format!(
                    "warp sample row {} has {} fields, expected 4",
                    lineno + 2,
                    fields.len()
                )));
            }
            for (col, f) in cols.iter_mut().zip(fields) {
                col.push(f.parse::<f64>().map_err(|e| {
                    Error::parse(format!("warp sample row {}: `{f}`: {e}", lineno + 2))
                })?);
            }
        }
        let [r, s, ds, dds] = cols;
        SampledWarp::new(r, s, ds, dds)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,sigma,dsigma,ddsigma\n");
        for i in 0..self.radii.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.radii[i], self.values[i], self.slopes[i], self.curvatures[i]
            ));
        }
        out
    }
}

/// A warping function of one of the supported kinds.
#[derive(Debug, Clone, PartialEq)]
pub enum WarpingFunction {
    /// `σ(r) = r`, the Euclidean model.
    Identity,
    /// `σ(r) = sinh r`, the hyperbolic plane of curvature −1.
    Sinh,
    OddPolynomial(OddPolynomial),
    /// `σ_k(r) = k^{-1/2} σ(√k r)`.
    ScaledCopy {
        base: Box<WarpingFunction>,
        k: f64,
    },
    SampledSpline(SampledWarp),
}

impl WarpingFunction {
    pub fn odd_polynomial(coeffs: Vec<f64>) -> Result<Self> {
        Ok(WarpingFunction::OddPolynomial(OddPolynomial::new(coeffs)?))
    }

    pub fn is_sampled(&self) -> bool {
        match self {
            WarpingFunction::SampledSpline(_) => true,
            WarpingFunction::ScaledCopy { base, .. } => base.is_sampled(),
            _ => false,
        }
    }

    /// Parses a warp spec string: `identity`, `sinh`, `poly:c1,c3,...`,
    /// `scaled:<k>:<spec>` or `file:<path>`.
    pub fn parse_spec(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        match spec {
            "identity" | "r" => return Ok(WarpingFunction::Identity),
            "sinh" => return Ok(WarpingFunction::Sinh),
            _ => {}
        }
        if let Some(rest) = spec.strip_prefix("poly:") {
            let coeffs = rest
                .split(',')
                .map(|c| {
                    c.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::parse(format!("poly coefficient `{c}`: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            return WarpingFunction::odd_polynomial(coeffs);
        }
        if let Some(rest) = spec.strip_prefix("scaled:") {
            let (k, base) = rest
                .split_once(':')
                .ok_or_else(|| Error::parse("scaled spec must read `scaled:<k>:<spec>`"))?;
            let k: f64 = k
                .parse()
                .map_err(|e| Error::parse(format!("scale `{k}`: {e}")))?;
            return scale_k(&WarpingFunction::parse_spec(base)?, k);
        }
        if let Some(path) = spec.strip_prefix("file:") {
            return WarpingFunction::from_csv_file(path);
        }
        Err(Error::parse(format!(
            "unknown warp spec `{spec}` (expected identity, sinh, poly:..., scaled:k:..., file:...)"
        )))
    }

    pub fn from_csv_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::usage(format!(
                "cannot read warp sample file {}: {e}",
                path.display()
            ))
        })?;
        Ok(WarpingFunction::SampledSpline(SampledWarp::from_csv_str(
            &text,
        )?))
    }
}

impl fmt::Display for WarpingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WarpingFunction::Identity => write!(f, "identity"),
            WarpingFunction::Sinh => write!(f, "sinh"),
            WarpingFunction::OddPolynomial(p) => {
                let cs: Vec<String> = p.coeffs.iter().map(|c| c.to_string()).collect();
                write!(f, "poly:{}", cs.join(","))
            }
            WarpingFunction::ScaledCopy { base, k } => write!(f, "scaled:{k}:{base}"),
            WarpingFunction::SampledSpline(s) => write!(f, "sampled[{} knots]", s.radii.len()),
        }
    }
}

fn check_radius(r: f64) -> Result<()> {
    if !r.is_finite() || r < 0.0 {
        return Err(Error::domain(format!(
            "warp evaluated at r = {r}; radius must be finite and ≥ 0"
        )));
    }
    Ok(())
}

impl Warp for WarpingFunction {
    fn jet(&self, r: f64) -> Result<WarpJet> {
        check_radius(r)?;
        Ok(match self {
            WarpingFunction::Identity => WarpJet::new(r, 1.0, 0.0),
            WarpingFunction::Sinh => WarpJet::new(r.sinh(), r.cosh(), r.sinh()),
            WarpingFunction::OddPolynomial(p) => {
                let (mut v, mut d1, mut d2) = (0.0, 0.0, 0.0);
                let r2 = r * r;
                let mut even = 1.0; // r^{2i}
                let mut odd = r; // r^{2i-1} for i ≥ 1
                for (i, &c) in p.coeffs.iter().enumerate() {
                    let deg = (2 * i + 1) as f64;
                    v += c * even * r;
                    d1 += deg * c * even;
                    if i > 0 {
                        d2 += deg * (deg - 1.0) * c * odd;
                        odd *= r2;
                    }
                    even *= r2;
                }
                WarpJet::new(v, d1, d2)
            }
            WarpingFunction::ScaledCopy { base, k } => {
                let sk = k.sqrt();
                let j = base.jet(sk * r)?;
                WarpJet::new(j.value / sk, j.d1, sk * j.d2)
            }
            WarpingFunction::SampledSpline(s) => s.eval(r)?,
        })
    }

    fn slope_excess(&self, r: f64) -> Result<f64> {
        check_radius(r)?;
        match self {
            WarpingFunction::Identity => Ok(0.0),
            WarpingFunction::Sinh => {
                let h = (0.5 * r).sinh();
                Ok(2.0 * h * h)
            }
            WarpingFunction::OddPolynomial(p) => {
                let r2 = r * r;
                let mut pow = 1.0;
                let mut acc = 0.0;
                for (i, &c) in p.coeffs.iter().enumerate() {
                    if i > 0 {
                        acc += (2 * i + 1) as f64 * c * pow;
                    }
                    pow *= r2;
                }
                Ok(acc)
            }
            WarpingFunction::ScaledCopy { base, k } => base.slope_excess(k.sqrt() * r),
            WarpingFunction::SampledSpline(s) => Ok(s.eval(r)?.d1 - 1.0),
        }
    }

    fn pole_third_derivative(&self) -> Option<f64> {
        match self {
            WarpingFunction::Identity => Some(0.0),
            WarpingFunction::Sinh => Some(1.0),
            WarpingFunction::OddPolynomial(p) => {
                Some(6.0 * p.coeffs.get(1).copied().unwrap_or(0.0))
            }
            WarpingFunction::ScaledCopy { base, k } => base.pole_third_derivative().map(|a| k * a),
            WarpingFunction::SampledSpline(_) => None,
        }
    }
}

impl<W: Warp + ?Sized> Warp for &W {
    fn jet(&self, r: f64) -> Result<WarpJet> {
        (**self).jet(r)
    }
    fn slope_excess(&self, r: f64) -> Result<f64> {
        (**self).slope_excess(r)
    }
    fn pole_third_derivative(&self) -> Option<f64> {
        (**self).pole_third_derivative()
    }
}

/// `eval_warp`: the jet `(σ, σ′, σ″)` at `r`.
pub fn eval_warp<W: Warp + ?Sized>(w: &W, r: f64) -> Result<(f64, f64, f64)> {
    let j = w.jet(r)?;
    Ok((j.value, j.d1, j.d2))
}

/// `−σ″(r)/σ(r)`; at the pole the limit `−σ‴(0)`.
pub fn curvature_radial<W: Warp + ?Sized>(w: &W, r: f64) -> Result<f64> {
    check_radius(r)?;
    if r == 0.0 {
        return w
            .pole_third_derivative()
            .map(|a| -a)
            .ok_or_else(|| Error::domain("radial curvature at the pole needs an analytic σ‴(0)"));
    }
    let j = w.jet(r)?;
    if !(j.value > 0.0) {
        return Err(Error::domain(format!(
            "σ({r}) = {} is not positive",
            j.value
        )));
    }
    Ok(-j.d2 / j.value)
}

/// `(1 − σ′(r)²)/σ(r)²`; at the pole the limit `−σ‴(0)` for analytic kinds.
pub fn curvature_tangential<W: Warp + ?Sized>(w: &W, r: f64) -> Result<f64> {
    check_radius(r)?;
    if r == 0.0 {
        return w.pole_third_derivative().map(|a| -a).ok_or_else(|| {
            Error::domain("tangential curvature at the pole is 0/0 for sampled warps")
        });
    }
    let j = w.jet(r)?;
    if !(j.value > 0.0) {
        return Err(Error::domain(format!(
            "σ({r}) = {} is not positive",
            j.value
        )));
    }
    let e = w.slope_excess(r)?;
    Ok(-e * (2.0 + e) / (j.value * j.value))
}

/// Curvature arrays of a warp on a grid together with its sign verdict.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CurvatureReport {
    pub grid: Vec<f64>,
    pub sec_rad: Vec<f64>,
    pub sec_tg: Vec<f64>,
    pub is_nonpositive: bool,
    /// Largest curvature value on the grid, clamped below at 0.
    pub worst_violation: f64,
    #[serde(skip)]
    pub worst_radius: f64,
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::usage("curvature grid is empty"));
    }
    if grid.iter().any(|&r| !(r > 0.0) || !r.is_finite()) {
        return Err(Error::usage(
            "curvature grid radii must be finite and positive",
        ));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::usage("curvature grid must be strictly increasing"));
    }
    Ok(())
}

/// Cartan–Hadamard check: `σ″ ≥ −tol` on every grid point.
pub fn is_cartan_hadamard<W: Warp + ?Sized>(w: &W, grid: &[f64]) -> Result<CurvatureReport> {
    validate_grid(grid)?;
    let mut sec_rad = Vec::with_capacity(grid.len());
    let mut sec_tg = Vec::with_capacity(grid.len());
    let mut convex = true;
    let mut worst = f64::NEG_INFINITY;
    let mut worst_radius = grid[0];
    for &r in grid {
        let j = w.jet(r)?;
        if j.d2 < -sign_tol(j.d2) {
            convex = false;
        }
        let kr = curvature_radial(w, r)?;
        let kt = curvature_tangential(w, r)?;
        let m = kr.max(kt);
        if m > worst {
            worst = m;
            worst_radius = r;
        }
        sec_rad.push(kr);
        sec_tg.push(kt);
    }
    Ok(CurvatureReport {
        grid: grid.to_vec(),
        sec_rad,
        sec_tg,
        is_nonpositive: convex,
        worst_violation: worst.max(0.0),
        worst_radius,
    })
}

/// `σ_k(r) = k^{-1/2} σ(√k r)`.
pub fn scale_k(w: &WarpingFunction, k: f64) -> Result<WarpingFunction> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::domain(format!(
            "scale k = {k} must be finite and > 0"
        )));
    }
    Ok(WarpingFunction::ScaledCopy {
        base: Box::new(w.clone()),
        k,
    })
}

/// Outcome of the hyperbolic-type check.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct HyperbolicTypeReport {
    pub is_hyperbolic_type: bool,
    pub convex: bool,
    pub slope_dominates: bool,
    pub grows_with_k: bool,
    pub first_failure: Option<String>,
}

/// Finite surrogate of the hyperbolic-type definition: `σ″ ≥ 0`, and for
/// every `k` in `k_list` and `r` in `grid`, `σ_k′(r) ≥ σ_k(r)` with `σ_k(r)`
/// strictly increasing along `k_list`.
pub fn is_hyperbolic_type(
    w: &WarpingFunction,
    grid: &[f64],
    k_list: &[f64],
) -> Result<HyperbolicTypeReport> {
    validate_grid(grid)?;
    if k_list.is_empty() {
        return Err(Error::usage("k list is empty"));
    }
    if k_list.iter().any(|&k| !(k > 0.0)) || k_list.windows(2).any(|p| !(p[1] > p[0])) {
        return Err(Error::usage(
            "k list must be positive and strictly increasing",
        ));
    }
    let mut first_failure = None;
    let mut convex = true;
    for &r in grid {
        let j = w.jet(r)?;
        if j.d2 < -sign_tol(j.d2) {
            convex = false;
            first_failure.get_or_insert(format!("σ″({r}) = {} < 0", j.d2));
            break;
        }
    }
    let mut slope_dominates = true;
    let mut grows_with_k = true;
    let scaled: Vec<WarpingFunction> = k_list
        .iter()
        .map(|&k| scale_k(w, k))
        .collect::<Result<_>>()?;
    for &r in grid {
        let mut prev: Option<f64> = None;
        for (sk, &k) in scaled.iter().zip(k_list) {
            let j = sk.jet(r)?;
            if slope_dominates && j.d1 < j.value - sign_tol(j.value) {
                slope_dominates = false;
                first_failure.get_or_insert(format!(
                    "σ_k′({r}) = {} < σ_k({r}) = {} at k = {k}",
                    j.d1, j.value
                ));
            }
            if let Some(p) = prev {
                if grows_with_k && !(j.value > p) {
                    grows_with_k = false;
                    first_failure
                        .get_or_insert(format!("σ_k({r}) does not increase with k at k = {k}"));
                }
            }
            prev = Some(j.value);
        }
    }
    Ok(HyperbolicTypeReport {
        is_hyperbolic_type: convex && slope_dominates && grows_with_k,
        convex,
        slope_dominates,
        grows_with_k,
        first_failure,
    })
}

/// `per_decade` log-spaced radii covering `[r_min, r_max]`, endpoints included.
pub fn log_grid(r_min: f64, r_max: f64, per_decade: usize) -> Result<Vec<f64>> {
    if !(r_min > 0.0) || !(r_max > r_min) || per_decade == 0 {
        return Err(Error::usage(
            "log grid needs 0 < r_min < r_max and per_decade ≥ 1",
        ));
    }
    let decades = (r_max / r_min).log10();
    let n = ((decades * per_decade as f64).ceil() as usize).max(1);
    let (a, b) = (r_min.ln(), r_max.ln());
    Ok((0..=n)
        .map(|i| match i {
            0 => r_min,
            i if i == n => r_max,
            i => (a + (b - a) * i as f64 / n as f64).exp(),
        })
        .collect())
}

/// `n` evenly spaced radii on `(0, r_max]`.
pub fn uniform_grid(r_max: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| r_max * i as f64 / n as f64).collect()
}

/// Default grid for hyperbolic-type checks: `(0, 5]`.
pub fn default_check_grid() -> Vec<f64> {
    uniform_grid(5.0, 200)
}

/// Default scale list `{1, 2, 4, …, 1024}`.
pub fn default_k_list() -> Vec<f64> {
    (0..=10).map(|i| f64::from(1u32 << i)).collect()
}

/// A model manifold `N^n_σ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelManifold {
    dim: usize,
    warp: WarpingFunction,
}

impl ModelManifold {
    pub fn new(dim: usize, warp: WarpingFunction) -> Result<Self> {
        if dim < 2 {
            return Err(Error::usage(format!(
                "model manifold dimension {dim} must be ≥ 2"
            )));
        }
        Ok(ModelManifold { dim, warp })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn warp(&self) -> &WarpingFunction {
        &self.warp
    }
}
