//! Discrete p-energy of piecewise-affine maps from a triangle mesh into a
//! target chart, its exact gradient, and a limited-memory quasi-Newton
//! minimizer with Dirichlet boundary data.
//!
//! On a triangle `T` with affine interpolant `u`, the energy density uses
//! `|du_T|² = Σ_α h_ij(q) D_α u^i D_α u^j` with the metric evaluated at the
//! image of a quadrature point `q`.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::chart::{TargetChart, MAX_DIM};
use crate::error::{Error, Result};
use crate::mesh::TriMesh;
use crate::numeric::pairwise_sum;

/// Where the metric is sampled inside each triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Quadrature {
    /// One point at the image centroid.
    #[default]
    Centroid,
    /// Three points at the images of the edge midpoints.
    EdgeMidpoints,
}

impl Quadrature {
    fn points(self) -> &'static [([f64; 3], f64)] {
        const CENTROID: [([f64; 3], f64); 1] = [([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 1.0)];
        const EDGES: [([f64; 3], f64); 3] = [
            ([0.5, 0.5, 0.0], 1.0 / 3.0),
            ([0.0, 0.5, 0.5], 1.0 / 3.0),
            ([0.5, 0.0, 0.5], 1.0 / 3.0),
        ];
        match self {
            Quadrature::Centroid => &CENTROID,
            Quadrature::EdgeMidpoints => &EDGES,
        }
    }
}

/// Per-vertex points in the target chart, stored vertex-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MapState {
    dim: usize,
    coords: Vec<f64>,
}

impl MapState {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM || !coords.len().is_multiple_of(dim) {
            return Err(Error::usage(format!(
                "map state needs 1 ≤ dim ≤ {MAX_DIM} and a multiple of dim coordinates"
            )));
        }
        Ok(MapState { dim, coords })
    }

    pub fn constant(nv: usize, point: &[f64]) -> Result<Self> {
        MapState::new(
            point.len(),
            point
                .iter()
                .copied()
                .cycle()
                .take(nv * point.len())
                .collect(),
        )
    }

    pub fn from_fn(
        mesh: &TriMesh,
        dim: usize,
        mut f: impl FnMut(usize, [f64; 2]) -> Vec<f64>,
    ) -> Result<Self> {
        let mut coords = Vec::with_capacity(mesh.num_vertices() * dim);
        for (v, &p) in mesh.vertices().iter().enumerate() {
            let q = f(v, p);
            if q.len() != dim {
                return Err(Error::usage(format!(
                    "point for vertex {v} has {} coordinates",
                    q.len()
                )));
            }
            coords.extend(q);
        }
        MapState::new(dim, coords)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_vertices(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn point(&self, v: usize) -> &[f64] {
        &self.coords[v * self.dim..(v + 1) * self.dim]
    }

    pub fn point_mut(&mut self, v: usize) -> &mut [f64] {
        &mut self.coords[v * self.dim..(v + 1) * self.dim]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// `max_v max_i |a_v^i − b_v^i|`.
    pub fn sup_distance(&self, other: &MapState) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// CSV with header `vertex,x1,...,xn`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("vertex");
        for i in 1..=self.dim {
            write!(out, ",x{i}").unwrap();
        }
        out.push('\n');
        for v in 0..self.num_vertices() {
            write!(out, "{v}").unwrap();
            for x in self.point(v) {
                write!(out, ",{x}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Reads a full solution file; every vertex must appear once, in order.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let (dim, rows) = parse_vertex_csv(text)?;
        if rows.iter().enumerate().any(|(i, (v, _))| *v != i) {
            return Err(Error::parse(
                "solution rows must list vertices 0, 1, 2, … in order",
            ));
        }
        MapState::new(dim, rows.into_iter().flat_map(|(_, x)| x).collect())
    }
}

type VertexRows = Vec<(usize, Vec<f64>)>;

fn parse_vertex_csv(text: &str) -> Result<(usize, VertexRows)> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::parse("empty vertex CSV"))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let dim = cols.len().saturating_sub(1);
    let expected: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
    if cols.first() != Some(&"vertex")
        || dim == 0
        || cols[1..] != expected.iter().map(String::as_str).collect::<Vec<_>>()[..]
    {
        return Err(Error::parse(format!(
            "vertex CSV header must be `vertex,x1,...,xn`, got `{header}`"
        )));
    }
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != dim + 1 {
            return Err(Error::parse(format!(
                "row {} has {} fields, expected {}",
                n + 1,
                f.len(),
                dim + 1
            )));
        }
        let v = f[0]
            .parse::<usize>()
            .map_err(|_| Error::parse(format!("row {}: bad vertex index `{}`", n + 1, f[0])))?;
        let x = f[1..]
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::parse(format!("row {}: {e}", n + 1)))?;
        rows.push((v, x));
    }
    Ok((dim, rows))
}

/// Prescribed chart points on boundary vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    dim: usize,
    vertices: Vec<usize>,
    coords: Vec<f64>,
}

impl BoundaryData {
    /// Boundary data `f(v, position)` on every boundary vertex of `mesh`.
    pub fn from_fn(
        mesh: &TriMesh,
        dim: usize,
        mut f: impl FnMut(usize, [f64; 2]) -> Vec<f64>,
    ) -> Result<Self> {
        let vertices = mesh.boundary_vertices();
        let mut coords = Vec::with_capacity(vertices.len() * dim);
        for &v in &vertices {
            let q = f(v, mesh.vertices()[v]);
            if q.len() != dim {
                return Err(Error::usage(format!(
                    "boundary point for vertex {v} has {} coordinates",
                    q.len()
                )));
            }
            coords.extend(q);
        }
        BoundaryData::new(dim, vertices, coords)
    }

    pub fn new(dim: usize, vertices: Vec<usize>, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM || coords.len() != vertices.len() * dim {
            return Err(Error::usage("boundary data has inconsistent dimensions"));
        }
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::usage("boundary data has non-finite coordinates"));
        }
        Ok(BoundaryData {
            dim,
            vertices,
            coords,
        })
    }

    /// Boundary data taken from a full state.
    pub fn from_state(mesh: &TriMesh, state: &MapState) -> Result<Self> {
        BoundaryData::from_fn(mesh, state.dim(), |v, _| state.point(v).to_vec())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// Checks that exactly the boundary vertices of `mesh` are prescribed.
    pub fn check(&self, mesh: &TriMesh) -> Result<()> {
        let mut seen = vec![false; mesh.num_vertices()];
        for &v in &self.vertices {
            if v >= mesh.num_vertices() {
                return Err(Error::usage(format!(
                    "boundary data names vertex {v}, mesh has {}",
                    mesh.num_vertices()
                )));
            }
            if !mesh.is_boundary(v) {
                return Err(Error::usage(format!(
                    "boundary data prescribes interior vertex {v}"
                )));
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::usage(format!(
                    "boundary data lists vertex {v} twice"
                )));
            }
        }
        if let Some(v) = mesh.boundary_vertices().into_iter().find(|&v| !seen[v]) {
            return Err(Error::usage(format!(
                "boundary vertex {v} has no prescribed value"
            )));
        }
        Ok(())
    }

    /// Sup-norm diameter of the prescribed points and their centroid.
    fn extent(&self) -> (f64, Vec<f64>) {
        let n = self.vertices.len();
        let mut centroid = vec![0.0; self.dim];
        for i in 0..n {
            for (c, x) in centroid.iter_mut().zip(self.point(i)) {
                *c += x / n as f64;
            }
        }
        let mut diameter: f64 = 0.0;
        for a in 0..n {
            for b in a + 1..n {
                let d: f64 = self
                    .point(a)
                    .iter()
                    .zip(self.point(b))
                    .map(|(x, y)| (x - y).powi(2))
                    .sum();
                diameter = diameter.max(d.sqrt());
            }
        }
        (diameter, centroid)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("vertex");
        for i in 1..=self.dim {
            write!(out, ",x{i}").unwrap();
        }
        out.push('\n');
        for (i, v) in self.vertices.iter().enumerate() {
            write!(out, "{v}").unwrap();
            for x in self.point(i) {
                write!(out, ",{x}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let (dim, rows) = parse_vertex_csv(text)?;
        let vertices = rows.iter().map(|(v, _)| *v).collect();
        BoundaryData::new(
            dim,
            vertices,
            rows.into_iter().flat_map(|(_, x)| x).collect(),
        )
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        BoundaryData::from_csv_str(&std::fs::read_to_string(path)?)
    }
}

fn check_state(mesh: &TriMesh, chart: &TargetChart, state: &MapState) -> Result<()> {
    if state.num_vertices() != mesh.num_vertices() {
        return Err(Error::usage(format!(
            "state has {} vertices, mesh has {}",
            state.num_vertices(),
            mesh.num_vertices()
        )));
    }
    if state.dim() != chart.dim() {
        return Err(Error::usage(format!(
            "state dimension {} differs from target dimension {}",
            state.dim(),
            chart.dim()
        )));
    }
    Ok(())
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 2.0) || !p.is_finite() {
        return Err(Error::usage(format!("p must be ≥ 2, got {p}")));
    }
    Ok(())
}

/// Energy and local gradient (3 vertices × dim) of one triangle.
fn triangle_terms(
    mesh: &TriMesh,
    chart: &TargetChart,
    state: &MapState,
    p: f64,
    quadrature: Quadrature,
    t: usize,
    want_grad: bool,
) -> Result<(f64, [f64; 3 * MAX_DIM])> {
    let n = state.dim();
    let tri = mesh.triangles()[t];
    let grads = &mesh.grads()[t];
    let area = mesh.areas()[t];
    // D[α][i] = ∂_α u^i, from differences so constant maps give exactly 0
    let mut d = [[0.0; MAX_DIM]; 2];
    let u0 = state.point(tri[0]);
    for b in 1..3 {
        let u = state.point(tri[b]);
        for alpha in 0..2 {
            for i in 0..n {
                d[alpha][i] += (u[i] - u0[i]) * grads[b][alpha];
            }
        }
    }
    let mut energy = 0.0;
    let mut local = [0.0; 3 * MAX_DIM];
    for &(bary, weight) in quadrature.points() {
        let mut q = [0.0; MAX_DIM];
        for (b, &v) in tri.iter().enumerate() {
            for (qi, ui) in q.iter_mut().zip(state.point(v)) {
                *qi += bary[b] * ui;
            }
        }
        let q = &q[..n];
        let h = chart.metric_at(q)?;
        let mut hd = [[0.0; MAX_DIM]; 2];
        let mut s = 0.0;
        for alpha in 0..2 {
            for i in 0..n {
                let mut acc = 0.0;
                for j in 0..n {
                    acc += h[i * n + j] * d[alpha][j];
                }
                hd[alpha][i] = acc;
                s += acc * d[alpha][i];
            }
        }
        let s = s.max(0.0);
        energy += weight * area / p * s.powf(0.5 * p);
        if !want_grad {
            continue;
        }
        let c = weight * 0.5 * area * s.powf(0.5 * p - 1.0);
        if c == 0.0 {
            continue;
        }
        let dh = chart.metric_jacobian_at(q)?;
        let mut metric_part = [0.0; MAX_DIM];
        for (m, slot) in metric_part.iter_mut().enumerate().take(n) {
            let mut acc = 0.0;
            for da in &d {
                for i in 0..n {
                    for j in 0..n {
                        acc += dh[m * n * n + i * n + j] * da[i] * da[j];
                    }
                }
            }
            *slot = acc;
        }
        for b in 0..3 {
            for m in 0..n {
                let stiff = 2.0 * (hd[0][m] * grads[b][0] + hd[1][m] * grads[b][1]);
                local[b * n + m] += c * (stiff + bary[b] * metric_part[m]);
            }
        }
    }
    Ok((energy, local))
}

fn assemble(
    mesh: &TriMesh,
    chart: &TargetChart,
    state: &MapState,
    p: f64,
    quadrature: Quadrature,
    want_grad: bool,
) -> Result<(f64, Vec<f64>)> {
    check_state(mesh, chart, state)?;
    check_p(p)?;
    let terms: Vec<(f64, [f64; 3 * MAX_DIM])> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| triangle_terms(mesh, chart, state, p, quadrature, t, want_grad))
        .collect::<Result<_>>()?;
    let energies: Vec<f64> = terms.iter().map(|t| t.0).collect();
    let energy = pairwise_sum(&energies);
    let n = state.dim();
    let mut grad = Vec::new();
    if want_grad {
        grad = vec![0.0; state.coords.len()];
        for (t, (_, local)) in terms.iter().enumerate() {
            for (b, &v) in mesh.triangles()[t].iter().enumerate() {
                for m in 0..n {
                    grad[v * n + m] += local[b * n + m];
                }
            }
        }
        for v in mesh.boundary_vertices() {
            grad[v * n..(v + 1) * n].fill(0.0);
        }
    }
    Ok((energy, grad))
}

/// `Σ_T (A_T/p) |du_T|_h^p` with centroid quadrature.
pub fn energy(mesh: &TriMesh, chart: &TargetChart, state: &MapState, p: f64) -> Result<f64> {
    energy_with(mesh, chart, state, p, Quadrature::Centroid)
}

pub fn energy_with(
    mesh: &TriMesh,
    chart: &TargetChart,
    state: &MapState,
    p: f64,
    quadrature: Quadrature,
) -> Result<f64> {
    Ok(assemble(mesh, chart, state, p, quadrature, false)?.0)
}

/// Exact gradient of [`energy`] with respect to every vertex coordinate;
/// boundary rows are zero.
pub fn energy_gradient(
    mesh: &TriMesh,
    chart: &TargetChart,
    state: &MapState,
    p: f64,
) -> Result<Vec<f64>> {
    energy_gradient_with(mesh, chart, state, p, Quadrature::Centroid)
}

pub fn energy_gradient_with(
    mesh: &TriMesh,
    chart: &TargetChart,
    state: &MapState,
    p: f64,
    quadrature: Quadrature,
) -> Result<Vec<f64>> {
    Ok(assemble(mesh, chart, state, p, quadrature, true)?.1)
}

/// Sup-norm of the interior energy gradient.
pub fn residual(mesh: &TriMesh, chart: &TargetChart, state: &MapState, p: f64) -> Result<f64> {
    residual_with(mesh, chart, state, p, Quadrature::Centroid)
}

pub fn residual_with(
    mesh: &TriMesh,
    chart: &TargetChart,
    state: &MapState,
    p: f64,
    quadrature: Quadrature,
) -> Result<f64> {
    Ok(sup_norm(&energy_gradient_with(
        mesh, chart, state, p, quadrature,
    )?))
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Compressed P1 stiffness matrix restricted to interior rows.
struct Stiffness {
    diag: Vec<f64>,
    /// Off-diagonal interior-interior entries per interior row.
    rows: Vec<Vec<(usize, f64)>>,
    /// Interior-boundary couplings per interior row.
    boundary: Vec<Vec<(usize, f64)>>,
}

impl Stiffness {
    fn new(mesh: &TriMesh, slot: &[Option<usize>]) -> Self {
        let ni = slot.iter().flatten().count();
        let mut diag = vec![0.0; ni];
        let mut entries: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); ni];
        let mut boundary: Vec<std::collections::BTreeMap<usize, f64>> =
            vec![Default::default(); ni];
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let g = &mesh.grads()[t];
            let area = mesh.areas()[t];
            for a in 0..3 {
                let Some(ia) = slot[tri[a]] else { continue };
                for b in 0..3 {
                    let k = area * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                    match slot[tri[b]] {
                        Some(ib) if ib == ia => diag[ia] += k,
                        Some(ib) => *entries[ia].entry(ib).or_insert(0.0) += k,
                        None => *boundary[ia].entry(tri[b]).or_insert(0.0) += k,
                    }
                }
            }
        }
        Stiffness {
            diag,
            rows: entries
                .into_iter()
                .map(|m| m.into_iter().collect())
                .collect(),
            boundary: boundary
                .into_iter()
                .map(|m| m.into_iter().collect())
                .collect(),
        }
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.diag[i] * x[i] + self.rows[i].iter().map(|&(j, k)| k * x[j]).sum::<f64>();
        }
    }

    /// Jacobi-preconditioned conjugate gradients.
    fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = b.len();
        let mut x = vec![0.0; n];
        let b_norm = dot(b, b).sqrt();
        if b_norm == 0.0 {
            return Ok(x);
        }
        let mut r = b.to_vec();
        let mut z: Vec<f64> = r.iter().zip(&self.diag).map(|(r, d)| r / d).collect();
        let mut d = z.clone();
        let mut rz = dot(&r, &z);
        let mut ad = vec![0.0; n];
        for _ in 0..(20 * n + 100) {
            self.apply(&d, &mut ad);
            let dad = dot(&d, &ad);
            if !(dad > 0.0) {
                return Err(Error::Internal(
                    "stiffness matrix is not positive definite".into(),
                ));
            }
            let alpha = rz / dad;
            for i in 0..n {
                x[i] += alpha * d[i];
                r[i] -= alpha * ad[i];
            }
            if dot(&r, &r).sqrt() <= 1e-14 * b_norm {
                return Ok(x);
            }
            for i in 0..n {
                z[i] = r[i] / self.diag[i];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                d[i] = z[i] + beta * d[i];
            }
        }
        let rel = dot(&r, &r).sqrt() / b_norm;
        if rel <= 1e-10 {
            Ok(x)
        } else {
            Err(Error::Internal(format!(
                "conjugate gradients stalled at relative residual {rel}"
            )))
        }
    }
}

/// Layout of the free (interior) unknowns.
struct Layout {
    interior: Vec<usize>,
    slot: Vec<Option<usize>>,
}

impl Layout {
    fn new(mesh: &TriMesh) -> Result<Self> {
        let interior = mesh.interior_vertices();
        if interior.len() == mesh.num_vertices() {
            return Err(Error::usage("mesh has no boundary vertices"));
        }
        let mut slot = vec![None; mesh.num_vertices()];
        for (i, &v) in interior.iter().enumerate() {
            slot[v] = Some(i);
        }
        Ok(Layout { interior, slot })
    }

    fn gather(&self, state: &MapState) -> Vec<f64> {
        self.interior
            .iter()
            .flat_map(|&v| state.point(v).iter().copied())
            .collect()
    }

    fn scatter(&self, x: &[f64], state: &mut MapState) {
        let n = state.dim();
        for (i, &v) in self.interior.iter().enumerate() {
            state.point_mut(v).copy_from_slice(&x[i * n..(i + 1) * n]);
        }
    }
}

fn boundary_state(mesh: &TriMesh, bc: &BoundaryData) -> Result<MapState> {
    bc.check(mesh)?;
    let mut state = MapState::new(bc.dim(), vec![0.0; mesh.num_vertices() * bc.dim()])?;
    for (i, &v) in bc.vertices().iter().enumerate() {
        state.point_mut(v).copy_from_slice(bc.point(i));
    }
    Ok(state)
}

/// Componentwise discrete harmonic extension of the boundary data.
pub fn harmonic_init(mesh: &TriMesh, bc: &BoundaryData) -> Result<MapState> {
    let mut state = boundary_state(mesh, bc)?;
    let layout = Layout::new(mesh)?;
    let k = Stiffness::new(mesh, &layout.slot);
    let n = bc.dim();
    for m in 0..n {
        let rhs: Vec<f64> = k
            .boundary
            .iter()
            .map(|row| -row.iter().map(|&(v, c)| c * state.point(v)[m]).sum::<f64>())
            .collect();
        let x = k.solve(&rhs)?;
        for (i, &v) in layout.interior.iter().enumerate() {
            state.point_mut(v)[m] = x[i];
        }
    }
    Ok(state)
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveConfig {
    pub p: f64,
    pub grad_tol: f64,
    pub max_iter: usize,
    pub armijo_c1: f64,
    pub backtrack: f64,
    pub memory: usize,
    pub quadrature: Quadrature,
    pub seed: u64,
}

impl SolveConfig {
    pub fn new(p: f64) -> Self {
        SolveConfig {
            p,
            grad_tol: 1e-9,
            max_iter: 20_000,
            armijo_c1: 1e-4,
            backtrack: 0.5,
            memory: 10,
            quadrature: Quadrature::Centroid,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_p(self.p)?;
        if !(self.grad_tol > 0.0) {
            return Err(Error::usage("grad_tol must be > 0"));
        }
        if !(self.armijo_c1 > 0.0 && self.armijo_c1 < 0.5) {
            return Err(Error::usage("Armijo constant must lie in (0, 1/2)"));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::usage("backtrack factor must lie in (0, 1)"));
        }
        if self.memory == 0 {
            return Err(Error::usage("quasi-Newton memory must be ≥ 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub energy: f64,
    pub energy_trace: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub max_principle_margin: f64,
    pub converged: bool,
}

struct Objective<'a> {
    mesh: &'a TriMesh,
    chart: &'a TargetChart,
    layout: &'a Layout,
    p: f64,
    quadrature: Quadrature,
}

impl Objective<'_> {
    /// Energy and free gradient, `None` when the energy is not finite.
    fn eval(&self, x: &[f64], state: &mut MapState) -> Result<Option<(f64, Vec<f64>)>> {
        self.layout.scatter(x, state);
        if x.iter().any(|v| !v.is_finite()) {
            return Ok(None);
        }
        let (e, g) = assemble(self.mesh, self.chart, state, self.p, self.quadrature, true)?;
        if !e.is_finite() || g.iter().any(|v| !v.is_finite()) {
            return Ok(None);
        }
        Ok(Some((
            e,
            self.layout.gather(&MapState {
                dim: state.dim,
                coords: g,
            }),
        )))
    }
}

/// Iterations without a 1% improvement of the best residual after which
/// the minimizer gives up (rounding floor reached).
const STALL_ITERATIONS: usize = 200;

/// L-BFGS with Armijo backtracking. Near the rounding floor of the energy,
/// where sufficient decrease can no longer be resolved, a step is also
/// accepted when it does not increase the energy and the directional
/// derivative at the trial point satisfies the approximate Armijo bound
/// `φ′(α) ≤ (2c₁ − 1) φ′(0)`.
fn minimize(
    obj: &Objective,
    state: &mut MapState,
    config: &SolveConfig,
) -> Result<(Vec<f64>, usize, bool)> {
    let mut x = obj.layout.gather(state);
    let (mut f, mut g) = obj
        .eval(&x, state)?
        .ok_or_else(|| Error::Divergence("energy of the initial state is not finite".into()))?;
    let mut trace = vec![f];
    let mut pairs: std::collections::VecDeque<(Vec<f64>, Vec<f64>, f64)> = Default::default();
    let mut iterations = 0;
    let mut last_step: Option<f64> = None;
    let mut best = sup_norm(&g);
    let mut since_best = 0;
    while sup_norm(&g) > config.grad_tol
        && iterations < config.max_iter
        && since_best < STALL_ITERATIONS
    {
        let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut alphas = Vec::with_capacity(pairs.len());
        for (s, y, rho) in pairs.iter().rev() {
            let a = rho * dot(s, &d);
            for (di, yi) in d.iter_mut().zip(y) {
                *di -= a * yi;
            }
            alphas.push(a);
        }
        let gamma = pairs.back().map(|(s, y, _)| dot(s, y) / dot(y, y));
        if let Some(gm) = gamma {
            d.iter_mut().for_each(|v| *v *= gm);
        }
        for ((s, y, rho), a) in pairs.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &d);
            for (di, si) in d.iter_mut().zip(s) {
                *di += (a - b) * si;
            }
        }
        let mut slope = dot(&g, &d);
        let mut alpha = 1.0;
        if !(slope < 0.0) || gamma.is_none() {
            if !(slope < 0.0) {
                pairs.clear();
            }
            d = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
            alpha = last_step.unwrap_or(1.0 / sup_norm(&g).max(1.0));
        }
        let band = 64.0 * f64::EPSILON * f.abs().max(f64::MIN_POSITIVE);
        let mut accepted: Option<(Vec<f64>, f64, Vec<f64>)> = None;
        let mut any_finite = false;
        for _ in 0..80 {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + alpha * di).collect();
            if let Some((ft, gt)) = obj.eval(&trial, state)? {
                any_finite = true;
                if ft <= f + config.armijo_c1 * alpha * slope {
                    accepted = Some((trial, ft, gt));
                    break;
                }
                if ft <= f
                    && f - ft <= band
                    && dot(&gt, &d) <= (2.0 * config.armijo_c1 - 1.0) * slope
                {
                    accepted = Some((trial, ft, gt));
                    break;
                }
            }
            alpha *= config.backtrack;
        }
        let Some((xn, fnew, gn)) = accepted else {
            if !any_finite {
                return Err(Error::Divergence(format!(
                    "every trial step from energy {f} produced a non-finite energy"
                )));
            }
            if !pairs.is_empty() {
                pairs.clear();
                continue;
            }
            break;
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            last_step = Some(dot(&s, &s) / sy);
            pairs.push_back((s, y, 1.0 / sy));
            if pairs.len() > config.memory {
                pairs.pop_front();
            }
        }
        x = xn;
        f = fnew;
        g = gn;
        trace.push(f);
        iterations += 1;
        let res = sup_norm(&g);
        if res < 0.99 * best {
            best = res;
            since_best = 0;
        } else {
            since_best += 1;
        }
    }
    obj.layout.scatter(&x, state);
    let converged = sup_norm(&g) <= config.grad_tol;
    Ok((trace, iterations, converged))
}

fn solve_from(
    mesh: &TriMesh,
    chart: &TargetChart,
    mut state: MapState,
    config: &SolveConfig,
) -> Result<(MapState, SolveReport)> {
    config.validate()?;
    check_state(mesh, chart, &state)?;
    let layout = Layout::new(mesh)?;
    let obj = Objective {
        mesh,
        chart,
        layout: &layout,
        p: config.p,
        quadrature: config.quadrature,
    };
    let (energy_trace, iterations, converged) = minimize(&obj, &mut state, config)?;
    let residual = residual_with(mesh, chart, &state, config.p, config.quadrature)?;
    let margin = check_max_principle(mesh, chart, &state)?.margin;
    let report = SolveReport {
        energy: *energy_trace.last().unwrap(),
        energy_trace,
        residual,
        iterations,
        max_principle_margin: margin,
        converged,
    };
    Ok((state, report))
}

/// Minimizes the p-energy with the boundary data fixed, starting from the
/// harmonic extension.
pub fn solve(
    mesh: &TriMesh,
    chart: &TargetChart,
    bc: &BoundaryData,
    config: &SolveConfig,
) -> Result<(MapState, SolveReport)> {
    config.validate()?;
    if bc.dim() != chart.dim() {
        return Err(Error::usage(format!(
            "boundary data dimension {} differs from target dimension {}",
            bc.dim(),
            chart.dim()
        )));
    }
    let init = harmonic_init(mesh, bc)?;
    solve_from(mesh, chart, init, config)
}

/// Solves from an explicit initial state; boundary rows of `init` must
/// already hold the boundary data.
pub fn solve_with_init(
    mesh: &TriMesh,
    chart: &TargetChart,
    init: MapState,
    config: &SolveConfig,
) -> Result<(MapState, SolveReport)> {
    solve_from(mesh, chart, init, config)
}

#[derive(Debug, Clone, Serialize)]
pub struct MaxPrincipleReport {
    /// `max_interior |q_v| − max_boundary |q_v|`.
    pub margin: f64,
    /// `max(margin, 0)`.
    pub violation: f64,
    pub interior_max: f64,
    pub boundary_max: f64,
    pub mesh_size: f64,
    /// `2·(max boundary radius)·h + 1e−8`.
    pub tolerance: f64,
    pub within_tolerance: bool,
}

pub fn check_max_principle(
    mesh: &TriMesh,
    chart: &TargetChart,
    state: &MapState,
) -> Result<MaxPrincipleReport> {
    check_state(mesh, chart, state)?;
    let (mut interior_max, mut boundary_max) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for v in 0..mesh.num_vertices() {
        let r = chart.dist_to_pole(state.point(v));
        if mesh.is_boundary(v) {
            boundary_max = boundary_max.max(r);
        } else {
            interior_max = interior_max.max(r);
        }
    }
    let margin = interior_max - boundary_max;
    let h = mesh.mesh_size();
    let tolerance = 2.0 * boundary_max * h + 1e-8;
    Ok(MaxPrincipleReport {
        margin,
        violation: margin.max(0.0),
        interior_max,
        boundary_max,
        mesh_size: h,
        tolerance,
        within_tolerance: margin <= tolerance,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct StartOutcome {
    pub start: usize,
    pub converged: bool,
    pub residual: f64,
    pub energy: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct UniquenessReport {
    /// Maximum pairwise sup-distance between converged solutions.
    pub spread: f64,
    pub starts: Vec<StartOutcome>,
    pub all_converged: bool,
}

/// Solves from the harmonic extension and from `n_starts − 1` random
/// interior states drawn uniformly from the chart ball centred at the
/// boundary-data centroid with radius equal to the boundary-data diameter.
pub fn uniqueness_probe(
    mesh: &TriMesh,
    chart: &TargetChart,
    bc: &BoundaryData,
    config: &SolveConfig,
    n_starts: usize,
) -> Result<UniquenessReport> {
    config.validate()?;
    if n_starts < 1 {
        return Err(Error::usage("uniqueness probe needs at least one start"));
    }
    let init = harmonic_init(mesh, bc)?;
    let (radius, centre) = bc.extent();
    let n = bc.dim();
    let mut solutions = Vec::new();
    let mut starts = Vec::with_capacity(n_starts);
    for start in 0..n_starts {
        let mut state = init.clone();
        if start > 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(start as u64));
            for v in mesh.interior_vertices() {
                let offset = loop {
                    let cand: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                    if dot(&cand, &cand) <= 1.0 {
                        break cand;
                    }
                };
                for (m, x) in state.point_mut(v).iter_mut().enumerate() {
                    *x = centre[m] + radius * offset[m];
                }
            }
        }
        let (sol, report) = solve_from(mesh, chart, state, config)?;
        starts.push(StartOutcome {
            start,
            converged: report.converged,
            residual: report.residual,
            energy: report.energy,
            iterations: report.iterations,
        });
        if report.converged {
            solutions.push(sol);
        }
    }
    let mut spread: f64 = 0.0;
    for a in 0..solutions.len() {
        for b in a + 1..solutions.len() {
            spread = spread.max(solutions[a].sup_distance(&solutions[b]));
        }
    }
    let all_converged = starts.iter().all(|s| s.converged);
    Ok(UniquenessReport {
        spread,
        starts,
        all_converged,
    })
}
