//! Structured triangle meshes of planar domains.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// A triangulated planar domain.
///
/// Triangles are counter-clockwise. Areas and the constant gradients of the
/// three barycentric basis functions are cached per triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<bool>,
    areas: Vec<f64>,
    grads: Vec<[[f64; 2]; 3]>,
}

impl TriMesh {
    /// Validates and caches geometry.
    pub fn new(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        boundary: Vec<bool>,
    ) -> Result<Self> {
        if boundary.len() != vertices.len() {
            return Err(Error::usage("boundary flags and vertices differ in length"));
        }
        if vertices.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::usage("mesh has non-finite vertex coordinates"));
        }
        let nv = vertices.len();
        let mut areas = Vec::with_capacity(triangles.len());
        let mut grads = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= nv) {
                return Err(Error::usage(format!(
                    "triangle {t} references a missing vertex"
                )));
            }
            let [p0, p1, p2] = tri.map(|v| vertices[v]);
            let twice = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
            if !(twice > 0.0) {
                return Err(Error::usage(format!(
                    "triangle {t} has non-positive signed area {}",
                    0.5 * twice
                )));
            }
            areas.push(0.5 * twice);
            grads.push([
                [(p1[1] - p2[1]) / twice, (p2[0] - p1[0]) / twice],
                [(p2[1] - p0[1]) / twice, (p0[0] - p2[0]) / twice],
                [(p0[1] - p1[1]) / twice, (p1[0] - p0[0]) / twice],
            ]);
        }
        let mesh = TriMesh {
            vertices,
            triangles,
            boundary,
            areas,
            grads,
        };
        mesh.check_duplicates()?;
        mesh.check_boundary_flags()?;
        Ok(mesh)
    }

    fn check_duplicates(&self) -> Result<()> {
        let mut order: Vec<usize> = (0..self.vertices.len()).collect();
        order.sort_by(|&a, &b| self.vertices[a][0].total_cmp(&self.vertices[b][0]));
        for (n, &a) in order.iter().enumerate() {
            for &b in &order[n + 1..] {
                let (pa, pb) = (self.vertices[a], self.vertices[b]);
                if pb[0] - pa[0] > 1e-12 {
                    break;
                }
                if (pb[1] - pa[1]).abs() <= 1e-12 {
                    return Err(Error::usage(format!("vertices {a} and {b} coincide")));
                }
            }
        }
        Ok(())
    }

    fn check_boundary_flags(&self) -> Result<()> {
        let mut topological = vec![false; self.vertices.len()];
        for [a, b] in self.boundary_edges() {
            topological[a] = true;
            topological[b] = true;
        }
        if let Some(v) = (0..topological.len()).find(|&v| topological[v] != self.boundary[v]) {
            return Err(Error::usage(format!(
                "boundary flag of vertex {v} disagrees with the mesh topology"
            )));
        }
        Ok(())
    }

    fn edge_counts(&self) -> HashMap<[usize; 2], usize> {
        let mut counts = HashMap::new();
        for tri in &self.triangles {
            for e in 0..3 {
                let (a, b) = (tri[e], tri[(e + 1) % 3]);
                *counts.entry([a.min(b), a.max(b)]).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Edges belonging to exactly one triangle, sorted.
    pub fn boundary_edges(&self) -> Vec<[usize; 2]> {
        let mut edges: Vec<[usize; 2]> = self
            .edge_counts()
            .into_iter()
            .filter(|&(_, c)| c == 1)
            .map(|(e, _)| e)
            .collect();
        edges.sort_unstable();
        edges
    }

    pub fn edge_count(&self) -> usize {
        self.edge_counts().len()
    }

    /// `V − E + F`.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edge_count() as i64 + self.triangles.len() as i64
    }

    /// Longest edge length.
    pub fn mesh_size(&self) -> f64 {
        let mut h: f64 = 0.0;
        for tri in &self.triangles {
            for e in 0..3 {
                let (a, b) = (self.vertices[tri[e]], self.vertices[tri[(e + 1) % 3]]);
                h = h.max((a[0] - b[0]).hypot(a[1] - b[1]));
            }
        }
        h
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary(&self) -> &[bool] {
        &self.boundary
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    /// Gradients of the barycentric basis on each triangle.
    pub fn grads(&self) -> &[[[f64; 2]; 3]] {
        &self.grads
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn total_area(&self) -> f64 {
        crate::numeric::pairwise_sum(&self.areas)
    }

    pub fn boundary_vertices(&self) -> Vec<usize> {
        (0..self.vertices.len())
            .filter(|&v| self.boundary[v])
            .collect()
    }

    pub fn interior_vertices(&self) -> Vec<usize> {
        (0..self.vertices.len())
            .filter(|&v| !self.boundary[v])
            .collect()
    }

    /// Parses the plain-text mesh format.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::parse("empty mesh file"))?;
        let counts = parse_fields::<usize>(header, 2, "header")?;
        let (nv, nt) = (counts[0], counts[1]);
        let mut vertices = Vec::with_capacity(nv);
        let mut boundary = Vec::with_capacity(nv);
        for i in 0..nv {
            let line = lines
                .next()
                .ok_or_else(|| Error::parse(format!("mesh file ends before vertex {i}")))?;
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(Error::parse(format!("vertex line {i} needs `x y b`")));
            }
            let x = parse_one::<f64>(f[0], "vertex x")?;
            let y = parse_one::<f64>(f[1], "vertex y")?;
            let b = match f[2] {
                "0" => false,
                "1" => true,
                other => {
                    return Err(Error::parse(format!(
                        "boundary flag `{other}` is not 0 or 1"
                    )))
                }
            };
            vertices.push([x, y]);
            boundary.push(b);
        }
        let mut triangles = Vec::with_capacity(nt);
        for i in 0..nt {
            let line = lines
                .next()
                .ok_or_else(|| Error::parse(format!("mesh file ends before triangle {i}")))?;
            let t = parse_fields::<usize>(line, 3, "triangle")?;
            triangles.push([t[0], t[1], t[2]]);
        }
        if lines.next().is_some() {
            return Err(Error::parse("trailing data after the last triangle"));
        }
        TriMesh::new(vertices, triangles, boundary)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{} {}", self.vertices.len(), self.triangles.len()).unwrap();
        for (p, &b) in self.vertices.iter().zip(&self.boundary) {
            writeln!(out, "{} {} {}", p[0], p[1], u8::from(b)).unwrap();
        }
        for t in &self.triangles {
            writeln!(out, "{} {} {}", t[0], t[1], t[2]).unwrap();
        }
        out
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        TriMesh::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

fn parse_one<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::parse(format!("cannot parse {what} `{s}`")))
}

fn parse_fields<T: std::str::FromStr>(line: &str, n: usize, what: &str) -> Result<Vec<T>> {
    let f: Vec<&str> = line.split_whitespace().collect();
    if f.len() != n {
        return Err(Error::parse(format!(
            "{what} line `{line}` needs {n} fields"
        )));
    }
    f.iter().map(|s| parse_one(s, what)).collect()
}

/// Polar mesh of `r0 ≤ |x| ≤ r1`; vertex `i·ntheta + j` sits on ring `i`
/// at angle `2πj/ntheta`.
pub fn build_annulus(r0: f64, r1: f64, nr: usize, ntheta: usize) -> Result<TriMesh> {
    if !(r0 > 0.0 && r1 > r0 && r1.is_finite()) {
        return Err(Error::usage(format!(
            "annulus needs 0 < r0 < r1, got {r0}, {r1}"
        )));
    }
    if nr < 1 {
        return Err(Error::usage("annulus needs nr ≥ 1"));
    }
    let radii: Vec<f64> = (0..=nr)
        .map(|i| r0 + (r1 - r0) * i as f64 / nr as f64)
        .collect();
    build_annulus_graded(&radii, ntheta)
}

/// Polar mesh with ring radii `radii` (strictly increasing, positive).
pub fn build_annulus_graded(radii: &[f64], ntheta: usize) -> Result<TriMesh> {
    if ntheta < 3 {
        return Err(Error::usage("annulus needs ntheta ≥ 3"));
    }
    if radii.len() < 2 || !(radii[0] > 0.0) || radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::usage(
            "annulus ring radii must be positive and strictly increasing",
        ));
    }
    let nr = radii.len() - 1;
    let mut vertices = Vec::with_capacity(radii.len() * ntheta);
    let mut boundary = Vec::with_capacity(radii.len() * ntheta);
    for (i, &r) in radii.iter().enumerate() {
        for j in 0..ntheta {
            let a = std::f64::consts::TAU * j as f64 / ntheta as f64;
            vertices.push([r * a.cos(), r * a.sin()]);
            boundary.push(i == 0 || i == nr);
        }
    }
    let idx = |i: usize, j: usize| i * ntheta + j % ntheta;
    let mut triangles = Vec::with_capacity(2 * nr * ntheta);
    for i in 0..nr {
        for j in 0..ntheta {
            let (a, b, c, d) = (idx(i, j), idx(i, j + 1), idx(i + 1, j + 1), idx(i + 1, j));
            triangles.push([a, d, c]);
            triangles.push([a, c, b]);
        }
    }
    TriMesh::new(vertices, triangles, boundary)
}

/// `[0,w]×[0,h]` split into `nx×ny` cells, each cut along its diagonal.
pub fn build_rect(w: f64, h: f64, nx: usize, ny: usize) -> Result<TriMesh> {
    if !(w > 0.0 && h > 0.0 && w.is_finite() && h.is_finite()) {
        return Err(Error::usage(format!(
            "rectangle needs positive sides, got {w}×{h}"
        )));
    }
    if nx < 1 || ny < 1 {
        return Err(Error::usage("rectangle needs nx, ny ≥ 1"));
    }
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    let mut boundary = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([w * i as f64 / nx as f64, h * j as f64 / ny as f64]);
            boundary.push(i == 0 || j == 0 || i == nx || j == ny);
        }
    }
    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            triangles.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            triangles.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    TriMesh::new(vertices, triangles, boundary)
}

/// 1→4 midpoint subdivision. Existing vertices keep their indices; edge
/// midpoints are appended in order of first appearance.
pub fn refine(mesh: &TriMesh) -> Result<TriMesh> {
    let boundary_edges: std::collections::HashSet<[usize; 2]> =
        mesh.boundary_edges().into_iter().collect();
    let mut vertices = mesh.vertices.clone();
    let mut boundary = mesh.boundary.clone();
    let mut midpoints: HashMap<[usize; 2], usize> = HashMap::new();
    let mut triangles = Vec::with_capacity(4 * mesh.triangles.len());
    for tri in &mesh.triangles {
        let mut mid = [0usize; 3];
        for e in 0..3 {
            let (a, b) = (tri[e], tri[(e + 1) % 3]);
            let key = [a.min(b), a.max(b)];
            mid[e] = *midpoints.entry(key).or_insert_with(|| {
                let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
                vertices.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
                boundary.push(boundary_edges.contains(&key));
                vertices.len() - 1
            });
        }
        let [a, b, c] = *tri;
        let [ab, bc, ca] = mid;
        triangles.push([a, ab, ca]);
        triangles.push([ab, b, bc]);
        triangles.push([ca, bc, c]);
        triangles.push([ab, bc, ca]);
    }
    TriMesh::new(vertices, triangles, boundary)
}
