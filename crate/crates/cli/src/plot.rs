//! Deterministic SVG rendering: fixed canvas, fixed palette, fixed number
//! formatting, no timestamps. Identical data gives identical bytes.

use std::fmt::Write;
use std::str::FromStr;

use crate::{CliError, CliResult};

pub const WIDTH: f64 = 640.0;
pub const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 48.0;
const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// Warp profiles, e.g. `τ` against `ρ` and `σ_k`, with band markers.
    Warp,
    /// Curvature curves against `r`.
    Curvature,
    /// Energy against iteration.
    Trace,
    /// Mesh coloured by the distance of the solution from the pole.
    Heatmap,
}

impl FromStr for PlotKind {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "warp" => Ok(PlotKind::Warp),
            "curvature" => Ok(PlotKind::Curvature),
            "trace" => Ok(PlotKind::Trace),
            "heatmap" => Ok(PlotKind::Heatmap),
            other => Err(CliError::Usage(format!(
                "unknown plot kind `{other}` (expected warp, curvature, trace or heatmap)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

#[derive(Debug, Clone)]
pub enum PlotData {
    Lines {
        series: Vec<Series>,
        /// Vertical marker lines at these abscissae.
        markers: Vec<f64>,
    },
    Mesh {
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        values: Vec<f64>,
    },
}

impl PlotData {
    /// A single polyline of `ys` against `0, 1, 2, ...`.
    pub fn trace(label: &str, ys: &[f64]) -> Self {
        PlotData::Lines {
            series: vec![Series {
                label: label.to_string(),
                xs: (0..ys.len()).map(|i| i as f64).collect(),
                ys: ys.to_vec(),
            }],
            markers: Vec::new(),
        }
    }
}

/// Renders `data` as an SVG document of the given kind.
pub fn plot(data: &PlotData, kind: PlotKind) -> CliResult<String> {
    match (kind, data) {
        (
            PlotKind::Heatmap,
            PlotData::Mesh {
                vertices,
                triangles,
                values,
            },
        ) => heatmap(vertices, triangles, values),
        (PlotKind::Heatmap, _) => Err(CliError::Usage("heatmap plots need mesh data".into())),
        (_, PlotData::Lines { series, markers }) => lines(kind, series, markers),
        (_, PlotData::Mesh { .. }) => {
            Err(CliError::Usage(format!("{kind:?} plots need line data")))
        }
    }
}

fn header(title: &str) -> String {
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )
    .unwrap();
    writeln!(
        out,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="{}" y="20" font-family="sans-serif" font-size="14" text-anchor="middle">{title}</text>"#,
        WIDTH / 2.0
    )
    .unwrap();
    out
}

fn bounds(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    if lo > hi {
        return None;
    }
    // a flat range still needs a nonzero span
    if hi - lo <= 1e-300 {
        return Some((lo - 0.5, hi + 0.5));
    }
    Some((lo, hi))
}

fn lines(kind: PlotKind, series: &[Series], markers: &[f64]) -> CliResult<String> {
    if series.is_empty() || series.iter().all(|s| s.xs.is_empty()) {
        return Err(CliError::Usage("nothing to plot: data is empty".into()));
    }
    if let Some(s) = series.iter().find(|s| s.xs.len() != s.ys.len()) {
        return Err(CliError::Usage(format!(
            "series `{}` has mismatched x and y lengths",
            s.label
        )));
    }
    let finite =
        |s: &Series| s.ys.iter().all(|v| v.is_finite()) && s.xs.iter().all(|v| v.is_finite());
    if !series.iter().all(finite) {
        return Err(CliError::Usage(
            "plot data contains non-finite values".into(),
        ));
    }
    let (x0, x1) = bounds(series.iter().flat_map(|s| s.xs.iter().copied())).unwrap();
    let (y0, y1) = bounds(series.iter().flat_map(|s| s.ys.iter().copied())).unwrap();
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
    let (title, xlabel) = match kind {
        PlotKind::Warp => ("warp profiles", "r"),
        PlotKind::Curvature => ("sectional curvature", "r"),
        PlotKind::Trace => ("energy trace", "iteration"),
        PlotKind::Heatmap => unreachable!(),
    };
    let mut out = header(title);
    writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    )
    .unwrap();
    for (label, x, y, anchor) in [
        (format!("{x0:.3e}"), MARGIN, HEIGHT - MARGIN + 16.0, "start"),
        (
            format!("{x1:.3e}"),
            WIDTH - MARGIN,
            HEIGHT - MARGIN + 16.0,
            "end",
        ),
        (
            xlabel.to_string(),
            WIDTH / 2.0,
            HEIGHT - MARGIN + 30.0,
            "middle",
        ),
        (format!("{y0:.3e}"), MARGIN - 4.0, HEIGHT - MARGIN, "end"),
        (format!("{y1:.3e}"), MARGIN - 4.0, MARGIN + 10.0, "end"),
    ] {
        writeln!(
            out,
            r#"<text x="{x:.2}" y="{y:.2}" font-family="sans-serif" font-size="10" text-anchor="{anchor}">{label}</text>"#
        )
        .unwrap();
    }
    for &m in markers
        .iter()
        .filter(|m| m.is_finite() && **m >= x0 && **m <= x1)
    {
        writeln!(
            out,
            r##"<line x1="{0:.2}" y1="{MARGIN}" x2="{0:.2}" y2="{1}" stroke="#888888" stroke-dasharray="4 3"/>"##,
            px(m),
            HEIGHT - MARGIN
        )
        .unwrap();
    }
    for (idx, s) in series.iter().enumerate() {
        let colour = PALETTE[idx % PALETTE.len()];
        let points: Vec<String> =
            s.xs.iter()
                .zip(&s.ys)
                .map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(y)))
                .collect();
        writeln!(
            out,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" fill="{colour}">{}</text>"#,
            WIDTH - MARGIN - 90.0,
            MARGIN + 16.0 + 14.0 * idx as f64,
            s.label
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn colour(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let r = (255.0 * t).round() as u8;
    let b = (255.0 * (1.0 - t)).round() as u8;
    format!("#{r:02x}40{b:02x}")
}

fn heatmap(vertices: &[[f64; 2]], triangles: &[[usize; 3]], values: &[f64]) -> CliResult<String> {
    if triangles.is_empty() || vertices.is_empty() {
        return Err(CliError::Usage("nothing to plot: mesh is empty".into()));
    }
    if values.len() != vertices.len() {
        return Err(CliError::Usage("heatmap needs one value per vertex".into()));
    }
    if triangles.iter().flatten().any(|&v| v >= vertices.len()) {
        return Err(CliError::Usage(
            "heatmap triangle references a missing vertex".into(),
        ));
    }
    let (x0, x1) = bounds(vertices.iter().map(|p| p[0])).unwrap();
    let (y0, y1) = bounds(vertices.iter().map(|p| p[1])).unwrap();
    let (v0, v1) = bounds(values.iter().copied())
        .ok_or_else(|| CliError::Usage("heatmap values are not finite".into()))?;
    // equal aspect ratio
    let scale = ((WIDTH - 2.0 * MARGIN) / (x1 - x0)).min((HEIGHT - 2.0 * MARGIN) / (y1 - y0));
    let px = |x: f64| MARGIN + (x - x0) * scale;
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) * scale;
    let mut out = header("distance of the solution from the pole");
    for tri in triangles {
        let mean = tri.iter().map(|&v| values[v]).sum::<f64>() / 3.0;
        let pts: Vec<String> = tri
            .iter()
            .map(|&v| format!("{:.2},{:.2}", px(vertices[v][0]), py(vertices[v][1])))
            .collect();
        writeln!(
            out,
            r#"<polygon points="{}" fill="{}" stroke="none"/>"#,
            pts.join(" "),
            colour((mean - v0) / (v1 - v0))
        )
        .unwrap();
    }
    writeln!(
        out,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="10">range [{v0:.3e}, {v1:.3e}]</text>"#,
        MARGIN,
        HEIGHT - 12.0
    )
    .unwrap();
    out.push_str("</svg>\n");
    Ok(out)
}
