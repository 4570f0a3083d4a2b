//! Release gate: runs every acceptance scenario at its stated tolerance and
//! prints one PASS/FAIL line per criterion. Exits non-zero if any fails.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use pharmonic::chart::TargetChart;
use pharmonic::mesh::{build_annulus, build_rect, TriMesh};
use pharmonic::solver::{
    check_max_principle, energy, energy_gradient, solve, BoundaryData, MapState, SolveConfig,
};
use pharmonic::warp::{
    curvature_radial, curvature_tangential, is_cartan_hadamard, scale_k, uniform_grid,
    WarpingFunction,
};
use rand::{Rng, SeedableRng};
use serde_json::Value;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn cli(dir: &Path, args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_pharmonic"))
        .arg("--out-dir")
        .arg(dir)
        .args(args)
        .output()
        .expect("cannot launch the pharmonic binary");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn cli_ok(dir: &Path, args: &[&str]) -> Result<Run, String> {
    let run = cli(dir, args);
    ensure(run.code == 0, || {
        format!(
            "`{}` exited {}: {}",
            args.join(" "),
            run.code,
            run.stderr.trim()
        )
    })?;
    Ok(run)
}

fn read_json(path: &Path) -> Result<Value, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn num(v: &Value, key: &str) -> Result<f64, String> {
    v[key]
        .as_f64()
        .ok_or_else(|| format!("missing number `{key}`"))
}

fn tempdir() -> tempfile::TempDir {
    tempfile::tempdir().expect("cannot create a temporary directory")
}

fn sinh_k(k: f64, r: f64) -> (f64, f64) {
    let s = k.sqrt();
    ((s * r).sinh() / s, (s * r).cosh())
}

// 1
fn curvature_identities() -> Outcome {
    let grid = uniform_grid(5.0, 200);
    let sinh = is_cartan_hadamard(&WarpingFunction::Sinh, &grid).map_err(|e| e.to_string())?;
    let flat = is_cartan_hadamard(&WarpingFunction::Identity, &grid).map_err(|e| e.to_string())?;
    let dev_sinh = sinh
        .sec_rad
        .iter()
        .chain(&sinh.sec_tg)
        .map(|k| (k + 1.0).abs())
        .fold(0.0, f64::max);
    let dev_flat = flat
        .sec_rad
        .iter()
        .chain(&flat.sec_tg)
        .map(|k| k.abs())
        .fold(0.0, f64::max);
    ensure(grid.len() == 200, || "grid size".into())?;
    ensure(dev_sinh <= 1e-12, || {
        format!("sinh deviates from −1 by {dev_sinh:e}")
    })?;
    ensure(dev_flat <= 1e-12, || {
        format!("flat deviates from 0 by {dev_flat:e}")
    })?;
    Ok(format!(
        "max |sec+1| (sinh) = {dev_sinh:.1e}, max |sec| (r) = {dev_flat:.1e} on 200 radii"
    ))
}

// 2
fn curvature_scaling() -> Outcome {
    let cubic = WarpingFunction::odd_polynomial(vec![1.0, 1.0]).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for w in [WarpingFunction::Sinh, cubic] {
        for k in [2.0, 4.0, 9.0] {
            let wk = scale_k(&w, k).map_err(|e| e.to_string())?;
            for r in uniform_grid(2.0, 100) {
                for f in [curvature_radial, curvature_tangential] {
                    let scaled = f(&wk, r).map_err(|e| e.to_string())?;
                    let base = k * f(&w, k.sqrt() * r).map_err(|e| e.to_string())?;
                    worst = worst.max((scaled - base).abs() / base.abs());
                }
            }
        }
    }
    ensure(worst <= 1e-10, || format!("relative error {worst:e}"))?;
    Ok(format!(
        "max relative error {worst:.1e} over k ∈ {{2,4,9}}, 100 radii"
    ))
}

/// Doubling search evaluating the shifted feasibility inequalities directly
/// for `ρ = r + r³` against `σ_k = sinh(√k r)/√k`.
fn oracle_k(r1: f64, r2: f64, delta: f64) -> f64 {
    let rho = |r: f64| (r + r.powi(3), 1.0 + 3.0 * r * r);
    let mut k = 1.0;
    loop {
        let (_, lo) = rho(r1 + delta);
        let q = (sinh_k(k, r2 + delta).0 - rho(r1 - delta).0 - 2.0 * delta * lo)
            / ((r2 - delta) - (r1 + delta));
        if lo <= q && q <= sinh_k(k, r2 - delta).1 {
            return k;
        }
        k *= 2.0;
    }
}

fn glue_run(dir: &Path, threads: &str) -> Result<Run, String> {
    cli_ok(
        dir,
        &[
            "--threads",
            threads,
            "glue",
            "--rho",
            "poly:1,1",
            "--sigma",
            "sinh",
            "--rbar",
            "1",
            "--r",
            "4",
        ],
    )
}

// 3
fn gluing_pipeline() -> Outcome {
    let dir = tempdir();
    let start = Instant::now();
    glue_run(dir.path(), "4")?;
    let elapsed = start.elapsed().as_secs_f64();
    let cert = read_json(&dir.path().join("certificate.json"))?;
    let (k0, k5) = (oracle_k(2.0, 3.0, 0.0), oracle_k(2.0, 3.0, 0.05));
    ensure(k0 == 2.0 && k5 == 2.0, || format!("oracle k = {k0}, {k5}"))?;
    ensure(num(&cert, "k")? == 2.0, || format!("k = {}", cert["k"]))?;
    ensure(num(&cert, "r1")? == 2.0 && num(&cert, "r2")? == 3.0, || {
        "R1, R2 ≠ 2, 3".into()
    })?;
    ensure(cert["pass"] == Value::Bool(true), || {
        "certificate pass = false".into()
    })?;
    let sd = num(&cert, "min_second_difference")?;
    let slope = num(&cert, "min_slope_minus_one")?;
    let head = num(&cert, "head_mismatch")?;
    let tail = num(&cert, "tail_mismatch")?;
    let curv = num(&cert, "max_curvature")?;
    let points = num(&cert, "grid_points")?;
    ensure(points >= 4000.0, || format!("{points} grid points"))?;
    ensure(sd >= -1e-9, || format!("min second difference {sd:e}"))?;
    ensure(slope >= -1e-12, || format!("min τ′−1 = {slope:e}"))?;
    ensure(head == 0.0, || format!("head mismatch {head:e}"))?;
    ensure(tail <= 1e-10, || format!("tail mismatch {tail:e}"))?;
    ensure(curv <= 1e-9, || format!("max curvature {curv:e}"))?;
    let tau = std::fs::read_to_string(dir.path().join("tau.csv")).map_err(|e| e.to_string())?;
    ensure(tau.starts_with("r,sigma,dsigma,ddsigma\n"), || {
        "tau.csv header".into()
    })?;
    ensure(elapsed < 1.0, || format!("runtime {elapsed:.2} s"))?;
    Ok(format!(
        "k = 2 (oracle agrees), min Δ² = {sd:.1e}, min τ′−1 = {slope:.1e}, tail = {tail:.1e}, max curvature = {curv:.1e}, {points} points, {elapsed:.2} s"
    ))
}

fn write_metric(path: &Path, j: impl Fn(f64) -> f64) -> Result<(), String> {
    let mut text = String::from("t,theta,j\n");
    for i in 1..=200 {
        let t = i as f64 / 50.0;
        for c in 0..64 {
            let th = std::f64::consts::TAU * c as f64 / 64.0;
            text.push_str(&format!("{t},{th},{}\n", j(t)));
        }
    }
    std::fs::write(path, text).map_err(|e| e.to_string())
}

// 4
fn blend_certificate() -> Outcome {
    let dir = tempdir();
    let grid = dir.path().join("grid.csv");
    write_metric(&grid, |t| t * t)?;
    let grid_s = grid.to_str().unwrap();
    cli_ok(
        dir.path(),
        &["blend", "--metric", grid_s, "--r1", "1", "--r2", "2"],
    )?;
    let cert = read_json(&dir.path().join("blend_cert.json"))?;
    // grid-min oracle of sinh²t/t² over the annulus points
    let c2_oracle = (50..=100)
        .map(|i| {
            let t = i as f64 / 50.0;
            t.sinh().powi(2) / (t * t)
        })
        .fold(f64::INFINITY, f64::min);
    let c2 = num(&cert, "c2")?;
    ensure((c2 - c2_oracle).abs() <= 1e-12 * c2_oracle, || {
        format!("c2 = {c2} vs oracle {c2_oracle}")
    })?;
    ensure((c2 - 1.3811).abs() <= 1e-4, || format!("c2 = {c2}"))?;
    ensure(num(&cert, "k")? == 1.0, || format!("k = {}", cert["k"]))?;
    let min = num(&cert, "min_dt_j_hat")?;
    ensure(min > 0.0 && cert["pass"] == Value::Bool(true), || {
        format!("min ∂_t ĵ = {min}")
    })?;
    let rows = std::fs::read_to_string(dir.path().join("blended.csv"))
        .map_err(|e| e.to_string())?
        .lines()
        .count();
    ensure(rows == 1 + 200 * 64, || {
        format!("blended.csv has {rows} lines")
    })?;

    let bad = dir.path().join("bad.csv");
    write_metric(&bad, |t| 100.0 * t * t)?;
    let run = cli(
        dir.path(),
        &[
            "blend",
            "--metric",
            bad.to_str().unwrap(),
            "--r1",
            "1",
            "--r2",
            "2",
            "--k",
            "1",
        ],
    );
    let bad_cert = read_json(&dir.path().join("blend_cert.json"))?;
    ensure(run.code == 1, || {
        format!("adversarial blend exited {}", run.code)
    })?;
    ensure(bad_cert["pass"] == Value::Bool(false), || {
        "adversarial blend passed".into()
    })?;
    Ok(format!(
        "c2 = {c2:.6} (oracle {c2_oracle:.6}), k = 1, min ∂_t ĵ = {min:.3e} on 200×64; adversarial j flagged (min {:.3e})",
        num(&bad_cert, "min_dt_j_hat")?
    ))
}

// 5
fn gradient_correctness() -> Outcome {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    let ps = [2.0, 2.5, 3.0, 4.0];
    let step = 1e-5;
    let mut worst: f64 = 0.0;
    for config in 0..20 {
        let p = ps[config % 4];
        let warp = if config % 2 == 0 {
            WarpingFunction::Identity
        } else {
            WarpingFunction::Sinh
        };
        let mesh = if (config / 2) % 2 == 0 {
            build_rect(1.0, 1.0, 3, 3)
        } else {
            build_annulus(0.5, 1.2, 2, 9)
        }
        .map_err(|e| e.to_string())?;
        let chart = TargetChart::model(2, warp).map_err(|e| e.to_string())?;
        let state = MapState::from_fn(&mesh, 2, |_, x| {
            vec![
                0.6 * x[0] + 0.3 * rng.gen_range(-1.0..1.0),
                0.4 * x[1] + 0.3 * rng.gen_range(-1.0..1.0),
            ]
        })
        .map_err(|e| e.to_string())?;
        let g = energy_gradient(&mesh, &chart, &state, p).map_err(|e| e.to_string())?;
        let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut err: f64 = 0.0;
        for v in mesh.interior_vertices() {
            for m in 0..2 {
                let (mut plus, mut minus) = (state.clone(), state.clone());
                plus.point_mut(v)[m] += step;
                minus.point_mut(v)[m] -= step;
                let fd = (energy(&mesh, &chart, &plus, p).map_err(|e| e.to_string())?
                    - energy(&mesh, &chart, &minus, p).map_err(|e| e.to_string())?)
                    / (2.0 * step);
                err = err.max((fd - g[v * 2 + m]).abs());
            }
        }
        worst = worst.max(err / scale);
    }
    ensure(worst <= 1e-6, || format!("relative sup error {worst:e}"))?;
    Ok(format!(
        "20 configurations, max relative sup error {worst:.1e}"
    ))
}

fn write_bc(
    path: &Path,
    mesh: &TriMesh,
    f: impl Fn([f64; 2]) -> Vec<f64>,
) -> Result<BoundaryData, String> {
    let dim = f([0.0, 0.0]).len();
    let bc = BoundaryData::from_fn(mesh, dim, |_, x| f(x)).map_err(|e| e.to_string())?;
    std::fs::write(path, bc.to_csv()).map_err(|e| e.to_string())?;
    Ok(bc)
}

fn affine(x: [f64; 2]) -> Vec<f64> {
    vec![1.0 - 0.5 * x[0] + 0.25 * x[1], 0.3 * x[0] + 1.5 * x[1]]
}

fn recovery_run(dir: &Path, threads: &str) -> Result<(), String> {
    cli_ok(
        dir,
        &[
            "mesh", "rect", "--w", "2", "--h", "1", "--nx", "10", "--ny", "6",
        ],
    )?;
    let mesh = TriMesh::read(dir.join("mesh.txt")).map_err(|e| e.to_string())?;
    write_bc(&dir.join("bc.csv"), &mesh, affine)?;
    let (m, b) = (dir.join("mesh.txt"), dir.join("bc.csv"));
    cli_ok(
        dir,
        &[
            "--threads",
            threads,
            "--tol",
            "1e-10",
            "solve",
            "--mesh",
            m.to_str().unwrap(),
            "--target",
            "identity",
            "--p",
            "2",
            "--bc",
            b.to_str().unwrap(),
        ],
    )?;
    Ok(())
}

// 6
fn exact_recovery() -> Outcome {
    let dir = tempdir();
    recovery_run(dir.path(), "4")?;
    let mesh = TriMesh::read(dir.path().join("mesh.txt")).map_err(|e| e.to_string())?;
    let text =
        std::fs::read_to_string(dir.path().join("solution.csv")).map_err(|e| e.to_string())?;
    let u = MapState::from_csv_str(&text).map_err(|e| e.to_string())?;
    let report = read_json(&dir.path().join("report.json"))?;
    let mut err: f64 = 0.0;
    for (v, &x) in mesh.vertices().iter().enumerate() {
        let w = affine(x);
        err = err
            .max((u.point(v)[0] - w[0]).abs())
            .max((u.point(v)[1] - w[1]).abs());
    }
    let res = num(&report, "residual")?;
    ensure(err <= 1e-8, || format!("sup error {err:e}"))?;
    ensure(res <= 1e-10, || format!("residual {res:e}"))?;
    ensure(report["converged"] == Value::Bool(true), || {
        "not converged".into()
    })?;
    Ok(format!("sup error {err:.1e}, residual {res:.1e}"))
}

// 7
fn radial_oracle() -> Outcome {
    // u = A r^{(p−2)/(p−1)} + B with u(1) = 0, u(2) = 1
    let exact = |r: f64| {
        let e = (3.0 - 2.0) / (3.0 - 1.0);
        (r.powf(e) - 1.0) / (2f64.powf(e) - 1.0)
    };
    let mut errs = Vec::new();
    for (nr, nt) in [(4, 32), (8, 64), (16, 128)] {
        let mesh = build_annulus(1.0, 2.0, nr, nt).map_err(|e| e.to_string())?;
        let bc = BoundaryData::from_fn(&mesh, 1, |_, x| {
            vec![if x[0].hypot(x[1]) < 1.5 { 0.0 } else { 1.0 }]
        })
        .map_err(|e| e.to_string())?;
        let mut cfg = SolveConfig::new(3.0);
        cfg.grad_tol = 1e-11;
        let (u, rep) = solve(&mesh, &TargetChart::Line, &bc, &cfg).map_err(|e| e.to_string())?;
        ensure(rep.converged, || {
            format!("level ({nr}, {nt}) did not converge")
        })?;
        let err = mesh
            .vertices()
            .iter()
            .enumerate()
            .map(|(v, x)| (u.point(v)[0] - exact(x[0].hypot(x[1]))).abs())
            .fold(0.0, f64::max);
        errs.push(err);
    }
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    ensure(errs[0] < 0.05, || format!("coarse error {:e}", errs[0]))?;
    ensure(orders.iter().all(|&o| o >= 0.9), || {
        format!("orders {orders:?}, errors {errs:?}")
    })?;
    Ok(format!(
        "errors {:.2e}, {:.2e}, {:.2e}; observed orders {:.2}, {:.2}",
        errs[0], errs[1], errs[2], orders[0], orders[1]
    ))
}

fn wobbled(x: [f64; 2]) -> Vec<f64> {
    let th = x[1].atan2(x[0]);
    let rad = if x[0].hypot(x[1]) < 1.5 { 0.5 } else { 1.0 } * (1.0 + 0.1 * (2.0 * th).cos());
    let a = th + 0.2 * (3.0 * th).sin();
    vec![rad * a.cos(), rad * a.sin()]
}

// 8
fn max_principle_suite() -> Outcome {
    let (mut cells, mut non_increasing) = (0, 0);
    let mut worst_excess = f64::NEG_INFINITY;
    let mut signed = Vec::new();
    for (name, warp) in [
        ("r", WarpingFunction::Identity),
        ("sinh", WarpingFunction::Sinh),
    ] {
        for p in [2.0, 3.0, 4.0] {
            let chart = TargetChart::model(2, warp.clone()).map_err(|e| e.to_string())?;
            let mut levels = Vec::new();
            for (nr, nt) in [(4, 32), (8, 64)] {
                let mesh = build_annulus(1.0, 2.0, nr, nt).map_err(|e| e.to_string())?;
                let bc = BoundaryData::from_fn(&mesh, 2, |_, x| wobbled(x))
                    .map_err(|e| e.to_string())?;
                let (u, rep) =
                    solve(&mesh, &chart, &bc, &SolveConfig::new(p)).map_err(|e| e.to_string())?;
                ensure(rep.converged, || {
                    format!("{name} p = {p} ({nr}, {nt}) did not converge")
                })?;
                let mp = check_max_principle(&mesh, &chart, &u).map_err(|e| e.to_string())?;
                let bound = 2.0 * mp.boundary_max * mesh.mesh_size() + 1e-8;
                worst_excess = worst_excess.max(mp.margin - bound);
                ensure(mp.margin <= bound, || {
                    format!("{name} p = {p}: margin {} > {bound}", mp.margin)
                })?;
                levels.push(mp);
            }
            cells += 1;
            if levels[1].violation <= levels[0].violation {
                non_increasing += 1;
            }
            signed.push(format!(
                "{name}/p{p}: {:.3}→{:.3}",
                levels[0].margin, levels[1].margin
            ));
        }
    }
    let frac = non_increasing as f64 / cells as f64;
    ensure(frac >= 0.9, || {
        format!("violation non-increasing in {non_increasing}/{cells} cells")
    })?;
    Ok(format!(
        "margin ≤ 2R₀h + 1e−8 in all 12 runs (max margin − bound {worst_excess:.3}); violation max(margin,0) non-increasing in {non_increasing}/{cells} cells; signed margins {}",
        signed.join(", ")
    ))
}

// 9
fn uniqueness_probe() -> Outcome {
    let dir = tempdir();
    cli_ok(
        dir.path(),
        &[
            "mesh", "annulus", "--r0", "1", "--r1", "2", "--nr", "4", "--ntheta", "24",
        ],
    )?;
    let mesh = TriMesh::read(dir.path().join("mesh.txt")).map_err(|e| e.to_string())?;
    write_bc(&dir.path().join("bc.csv"), &mesh, wobbled)?;
    let (m, b) = (dir.path().join("mesh.txt"), dir.path().join("bc.csv"));
    let run = cli_ok(
        dir.path(),
        &[
            "--tol",
            "1e-10",
            "verify",
            "uniqueness",
            "--mesh",
            m.to_str().unwrap(),
            "--target",
            "sinh",
            "--p",
            "3",
            "--bc",
            b.to_str().unwrap(),
            "--starts",
            "8",
            "--seed",
            "42",
        ],
    )?;
    let report: Value = serde_json::from_str(&run.stdout).map_err(|e| e.to_string())?;
    let spread = num(&report, "spread")?;
    let starts = report["starts"].as_array().map(Vec::len).unwrap_or(0);
    ensure(starts == 8, || format!("{starts} starts"))?;
    ensure(report["all_converged"] == Value::Bool(true), || {
        "a start did not converge".into()
    })?;
    ensure(spread <= 1e-6, || format!("spread {spread:e}"))?;
    Ok(format!(
        "8 starts converged, pairwise sup-spread {spread:.1e}"
    ))
}

fn mtm_tables(dir: &Path, threads: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    for p in ["2", "2.5", "3", "4"] {
        for target in ["identity", "sinh"] {
            let run = cli_ok(
                dir,
                &[
                    "--threads",
                    threads,
                    "mtm",
                    "--target",
                    target,
                    "--p",
                    p,
                    "--r0",
                    "0.5",
                    "--R",
                    "2",
                    "--refine",
                    "3",
                ],
            )?;
            out.push(run.stdout);
        }
    }
    Ok(out)
}

fn column(table: &str, name: &str) -> Result<Vec<f64>, String> {
    let mut lines = table.lines();
    let header: Vec<&str> = lines.next().ok_or("empty table")?.split(',').collect();
    let idx = header
        .iter()
        .position(|h| *h == name)
        .ok_or_else(|| format!("no column {name}"))?;
    lines
        .map(|l| {
            l.split(',')
                .nth(idx)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| format!("bad row `{l}`"))
        })
        .collect()
}

// 10
fn mtm_identity() -> Outcome {
    let dir = tempdir();
    let tables = mtm_tables(dir.path(), "4")?;
    let mut worst_final: f64 = 0.0;
    for (i, table) in tables.iter().enumerate() {
        let d = column(table, "defect")?;
        ensure(d.len() == 4, || format!("table {i} has {} levels", d.len()))?;
        ensure(d.windows(2).all(|w| w[1] <= 0.5 * w[0]), || {
            format!("table {i}: defects {d:?} do not halve")
        })?;
        ensure(d[3] < 1e-2, || {
            format!("table {i}: level-3 defect {}", d[3])
        })?;
        worst_final = worst_final.max(d[3]);
    }
    let mut exponents = Vec::new();
    for p in [3.0, 4.0] {
        let run = cli_ok(
            dir.path(),
            &[
                "mtm",
                "--target",
                "identity",
                "--p",
                &p.to_string(),
                "--r0",
                "0.5",
                "--R",
                "2",
                "--blowup",
                "1e-1,1e-2,1e-3,1e-4",
            ],
        )?;
        let rep: Value = serde_json::from_str(&run.stdout).map_err(|e| e.to_string())?;
        let e = num(&rep["rate"], "exponent")?;
        ensure((e - (p - 2.0)).abs() <= 0.05, || {
            format!("p = {p}: exponent {e}")
        })?;
        exponents.push(e);
    }
    let run = cli_ok(
        dir.path(),
        &[
            "mtm",
            "--target",
            "identity",
            "--p",
            "2",
            "--r0",
            "0.5",
            "--R",
            "2",
            "--blowup",
            "1e-1,1e-2,1e-3,1e-4",
        ],
    )?;
    let rep: Value = serde_json::from_str(&run.stdout).map_err(|e| e.to_string())?;
    let want = std::f64::consts::PI * 10f64.ln();
    let incs: Vec<f64> = rep["rate"]["increments"]
        .as_array()
        .ok_or("no increments")?
        .iter()
        .filter_map(Value::as_f64)
        .collect();
    let worst_inc = incs
        .iter()
        .map(|d| (d / want - 1.0).abs())
        .fold(0.0, f64::max);
    ensure(!incs.is_empty() && worst_inc <= 0.02, || {
        format!("increments {incs:?} vs π ln 10 = {want}")
    })?;
    Ok(format!(
        "8 tables halve per level, worst level-3 defect {worst_final:.1e}; exponents {:.4} (p=3), {:.4} (p=4); p=2 increments within {:.2}% of π ln 10",
        exponents[0],
        exponents[1],
        100.0 * worst_inc
    ))
}

// 11
fn determinism() -> Outcome {
    let (a, b) = (tempdir(), tempdir());
    let mut compared = Vec::new();
    glue_run(a.path(), "1")?;
    glue_run(b.path(), "4")?;
    recovery_run(a.path(), "1")?;
    recovery_run(b.path(), "4")?;
    for name in [
        "tau.csv",
        "certificate.json",
        "mesh.txt",
        "bc.csv",
        "solution.csv",
        "report.json",
    ] {
        let x = std::fs::read(a.path().join(name)).map_err(|e| format!("{name}: {e}"))?;
        let y = std::fs::read(b.path().join(name)).map_err(|e| format!("{name}: {e}"))?;
        ensure(x == y, || {
            format!("{name} differs between --threads 1 and 4")
        })?;
        compared.push(name);
    }
    let (t1, t4) = (mtm_tables(a.path(), "1")?, mtm_tables(b.path(), "4")?);
    ensure(t1 == t4, || {
        "mtm tables differ between --threads 1 and 4".into()
    })?;
    Ok(format!(
        "byte-identical: {} and {} mtm tables",
        compared.join(", "),
        t1.len()
    ))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("curvature identities", curvature_identities),
        ("curvature scaling law", curvature_scaling),
        ("gluing pipeline", gluing_pipeline),
        ("blend certificate", blend_certificate),
        ("gradient correctness", gradient_correctness),
        ("exact affine recovery", exact_recovery),
        ("radial p-harmonic oracle", radial_oracle),
        ("maximum-principle suite", max_principle_suite),
        ("uniqueness probe", uniqueness_probe),
        ("energy factorization and blow-up", mtm_identity),
        ("thread-count determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2} {name} [{secs:.2} s]: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name} [{secs:.2} s]: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
