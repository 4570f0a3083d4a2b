//! Degree-zero homogeneous extensions `ψ̄(x) = ψ(x/|x|)` of loops and the
//! factorization of their energy over annuli,
//! `E_p(ψ̄; r0 < |x| < R) = E_p(ψ) ∫_{r0}^{R} r^{1−p} dr`.

use serde::Serialize;

use crate::chart::{TargetChart, MAX_DIM};
use crate::error::{Error, Result};
use crate::mesh::{build_annulus, build_annulus_graded};
use crate::solver::{energy, MapState};

/// Samples `ψ(θ_j)` at `θ_j = 2πj/ntheta`, periodic.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopMap {
    dim: usize,
    points: Vec<f64>,
}

impl LoopMap {
    pub fn new(dim: usize, points: Vec<f64>) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM || !points.len().is_multiple_of(dim) {
            return Err(Error::usage(
                "loop points must come in groups of the target dimension",
            ));
        }
        if points.len() / dim < 3 {
            return Err(Error::usage("a loop needs at least 3 samples"));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::usage("loop has non-finite chart coordinates"));
        }
        Ok(LoopMap { dim, points })
    }

    pub fn from_fn(ntheta: usize, dim: usize, mut f: impl FnMut(f64) -> Vec<f64>) -> Result<Self> {
        let mut points = Vec::with_capacity(ntheta * dim);
        for j in 0..ntheta {
            let q = f(std::f64::consts::TAU * j as f64 / ntheta as f64);
            if q.len() != dim {
                return Err(Error::usage("loop sample has the wrong dimension"));
            }
            points.extend(q);
        }
        LoopMap::new(dim, points)
    }

    /// Chart circle of the given radius about the pole.
    pub fn circle(ntheta: usize, radius: f64) -> Result<Self> {
        LoopMap::from_fn(ntheta, 2, |t| vec![radius * t.cos(), radius * t.sin()])
    }

    pub fn ntheta(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, j: usize) -> &[f64] {
        let j = j % self.ntheta();
        &self.points[j * self.dim..(j + 1) * self.dim]
    }

    /// The loop with every chart coordinate multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        LoopMap::new(self.dim, self.points.iter().map(|v| v * c).collect())
    }

    fn is_constant(&self) -> bool {
        (1..self.ntheta()).all(|j| self.point(j) == self.point(0))
    }
}

/// `Σ_j (Δθ/p) (|ψ_{j+1} − ψ_j|_h / Δθ)^p`, metric at the chord midpoint.
pub fn loop_energy(psi: &LoopMap, chart: &TargetChart, p: f64) -> Result<f64> {
    if psi.dim() != chart.dim() {
        return Err(Error::usage("loop and target dimensions differ"));
    }
    if !(p >= 2.0) {
        return Err(Error::usage(format!("p must be ≥ 2, got {p}")));
    }
    let n = psi.ntheta();
    let dtheta = std::f64::consts::TAU / n as f64;
    let mut terms = Vec::with_capacity(n);
    for j in 0..n {
        let (a, b) = (psi.point(j), psi.point(j + 1));
        let mid: Vec<f64> = a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect();
        let delta: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
        let speed = chart.norm_at(&mid, &delta)? / dtheta;
        terms.push(dtheta / p * speed.powf(p));
    }
    Ok(crate::numeric::pairwise_sum(&terms))
}

/// `∫_{r0}^{R} r^{1−p} dr`.
pub fn radial_weight(p: f64, r0: f64, r: f64) -> Result<f64> {
    if !(r0 > 0.0) {
        return Err(Error::domain(format!(
            "∫ r^(1−p) dr diverges at r0 = {r0} for p ≥ 2"
        )));
    }
    if !(r > r0) {
        return Err(Error::usage(format!("need r0 < R, got {r0}, {r}")));
    }
    Ok(if p == 2.0 {
        (r / r0).ln()
    } else {
        (r.powf(2.0 - p) - r0.powf(2.0 - p)) / (2.0 - p)
    })
}

fn radially_constant_energy(
    psi: &LoopMap,
    chart: &TargetChart,
    p: f64,
    radii: &[f64],
) -> Result<f64> {
    let mesh = build_annulus_graded(radii, psi.ntheta())?;
    let n = psi.ntheta();
    let state = MapState::new(
        psi.dim(),
        (0..mesh.num_vertices())
            .flat_map(|v| psi.point(v % n).to_vec())
            .collect(),
    )?;
    energy(&mesh, chart, &state, p)
}

/// Discrete p-energy of `(r, θ_j) ↦ ψ(θ_j)` on the uniform polar annulus
/// mesh with `nr` radial layers.
pub fn extension_energy(
    psi: &LoopMap,
    chart: &TargetChart,
    p: f64,
    r0: f64,
    r: f64,
    nr: usize,
) -> Result<f64> {
    if !(r0 > 0.0) {
        return Err(Error::domain(format!(
            "extension energy over a punctured ball (r0 = {r0}) diverges for p ≥ 2"
        )));
    }
    let mesh = build_annulus(r0, r, nr, psi.ntheta())?;
    let radii: Vec<f64> = (0..=nr)
        .map(|i| mesh.vertices()[i * psi.ntheta()][0])
        .collect();
    radially_constant_energy(psi, chart, p, &radii)
}

/// Same as [`extension_energy`] on an arbitrary ring sequence.
pub fn extension_energy_graded(
    psi: &LoopMap,
    chart: &TargetChart,
    p: f64,
    radii: &[f64],
) -> Result<f64> {
    if radii.first().is_some_and(|&r| !(r > 0.0)) {
        return Err(Error::domain(
            "extension energy over a punctured ball diverges for p ≥ 2",
        ));
    }
    radially_constant_energy(psi, chart, p, radii)
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityRow {
    pub level: usize,
    pub nr: usize,
    pub ntheta: usize,
    pub loop_energy: f64,
    pub extension_energy: f64,
    pub ratio: f64,
    pub defect: f64,
}

/// Refinement study of the energy factorization: level `L` uses
/// `nr0·2^L` radial layers and `ntheta0·2^L` angles, the loop being
/// resampled by `make_loop(ntheta)`.
#[allow(clippy::too_many_arguments)]
pub fn identity_table(
    make_loop: &dyn Fn(usize) -> Result<LoopMap>,
    chart: &TargetChart,
    p: f64,
    r0: f64,
    r: f64,
    nr0: usize,
    ntheta0: usize,
    levels: usize,
) -> Result<Vec<IdentityRow>> {
    let weight = radial_weight(p, r0, r)?;
    (0..=levels)
        .map(|level| {
            let (nr, ntheta) = (nr0 << level, ntheta0 << level);
            let psi = make_loop(ntheta)?;
            let le = loop_energy(&psi, chart, p)?;
            let ee = extension_energy(&psi, chart, p, r0, r, nr)?;
            let ratio = ee / (le * weight);
            Ok(IdentityRow {
                level,
                nr,
                ntheta,
                loop_energy: le,
                extension_energy: ee,
                ratio,
                defect: (ratio - 1.0).abs(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BlowupRate {
    /// Least-squares slope of `log E` against `log(1/r0)`.
    Exponent { exponent: f64 },
    /// `p = 2`: energy increments between consecutive `r0`.
    LogDivergence { increments: Vec<f64> },
}

#[derive(Debug, Clone, Serialize)]
pub struct BlowupReport {
    pub r0: Vec<f64>,
    pub energies: Vec<f64>,
    pub rate: BlowupRate,
}

/// Extension energies on geometric annuli `r0 < |x| < R` with
/// `layers_per_decade` rings per factor of ten, and their growth as `r0 → 0`.
pub fn blowup_rate(
    psi: &LoopMap,
    chart: &TargetChart,
    p: f64,
    r0_seq: &[f64],
    r: f64,
    layers_per_decade: usize,
) -> Result<BlowupReport> {
    if psi.is_constant() {
        return Err(Error::domain(
            "constant loop has zero energy; no blow-up rate exists",
        ));
    }
    if r0_seq.len() < 2 || r0_seq.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::usage(
            "r0 sequence must have ≥ 2 strictly decreasing entries",
        ));
    }
    if layers_per_decade == 0 {
        return Err(Error::usage("layers per decade must be ≥ 1"));
    }
    let mut energies = Vec::with_capacity(r0_seq.len());
    for &r0 in r0_seq {
        if !(r0 > 0.0 && r0 < r) {
            return Err(Error::domain(format!("r0 = {r0} must lie in (0, R)")));
        }
        let decades = (r / r0).log10();
        let layers = ((decades * layers_per_decade as f64).ceil() as usize).max(1);
        let radii: Vec<f64> = (0..=layers)
            .map(|i| {
                if i == layers {
                    r
                } else {
                    r0 * (r / r0).powf(i as f64 / layers as f64)
                }
            })
            .collect();
        energies.push(extension_energy_graded(psi, chart, p, &radii)?);
    }
    let rate = if p == 2.0 {
        BlowupRate::LogDivergence {
            increments: energies.windows(2).map(|w| w[1] - w[0]).collect(),
        }
    } else {
        let xs: Vec<f64> = r0_seq.iter().map(|r0| (1.0 / r0).ln()).collect();
        let ys: Vec<f64> = energies.iter().map(|e| e.ln()).collect();
        let n = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        BlowupRate::Exponent {
            exponent: sxy / sxx,
        }
    };
    Ok(BlowupReport {
        r0: r0_seq.to_vec(),
        energies,
        rate,
    })
}
