use std::fmt;
use std::io::{self, Write};
use std::path::Path;

use pharmonic::blend::{blend_c2, blend_metric, find_k_blend, PolarMetricGrid};
use pharmonic::chart::TargetChart;
use pharmonic::glue::{certification_grid, certify, glue, GlueSpec};
use pharmonic::mesh::{build_annulus, build_rect, refine, TriMesh};
use pharmonic::mtm::{blowup_rate, identity_table, LoopMap};
use pharmonic::solver::{
    check_max_principle, solve, uniqueness_probe, BoundaryData, MapState, SolveConfig,
};
use pharmonic::warp::{is_cartan_hadamard, uniform_grid, SampledWarp, Warp, WarpingFunction};
use serde::Serialize;

use crate::plot::{plot, PlotData, PlotKind, Series};
use crate::{
    BlendArgs, Cli, CliError, CliResult, Command, GlueArgs, MeshCommand, MtmArgs, ProblemArgs,
    SolveArgs, VerifyCommand, WarpCommand,
};

/// Writes to stdout; a closed pipe (e.g. `| head`) ends output quietly.
fn emit(args: fmt::Arguments) -> CliResult<()> {
    match io::stdout().lock().write_fmt(args) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => {
            Err(CliError::Usage(format!("cannot write to stdout: {e}")))
        }
        _ => Ok(()),
    }
}

macro_rules! out {
    ($($arg:tt)*) => { emit(format_args!($($arg)*))? };
}

macro_rules! outln {
    ($($arg:tt)*) => { emit(format_args!("{}\n", format_args!($($arg)*)))? };
}

pub(crate) fn dispatch(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Warp(cmd) => warp(cli, cmd),
        Command::Glue(args) => glue_cmd(cli, args),
        Command::Blend(args) => blend(cli, args),
        Command::Mesh(cmd) => mesh(cli, cmd),
        Command::Solve(args) => solve_cmd(cli, args),
        Command::Verify(cmd) => verify(cli, cmd),
        Command::Mtm(args) => mtm(args),
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write_out(cli: &Cli, name: &str, contents: &str) -> CliResult<()> {
    let path = cli.out_dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

fn json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn parse_warp(spec: &str) -> CliResult<WarpingFunction> {
    Ok(WarpingFunction::parse_spec(spec)?)
}

/// Target chart for data of dimension `dim`; the only 1-dimensional target
/// is the Euclidean line.
fn chart_for(spec: &str, dim: usize) -> CliResult<TargetChart> {
    let warp = parse_warp(spec)?;
    if dim == 1 {
        return match warp {
            WarpingFunction::Identity => Ok(TargetChart::Line),
            _ => Err(CliError::Usage(format!(
                "1-dimensional data needs target `identity`, got `{spec}`"
            ))),
        };
    }
    Ok(TargetChart::model(dim, warp)?)
}

fn warp(cli: &Cli, cmd: &WarpCommand) -> CliResult<()> {
    match cmd {
        WarpCommand::Check {
            spec,
            rmax,
            n,
            plot: want_plot,
        } => {
            if !(*rmax > 0.0) || *n == 0 {
                return Err(CliError::Usage(
                    "warp check needs --rmax > 0 and --n ≥ 1".into(),
                ));
            }
            let w = parse_warp(spec)?;
            let report = is_cartan_hadamard(&w, &uniform_grid(*rmax, *n))?;
            out!("{}", json(&report)?);
            if *want_plot {
                let data = PlotData::Lines {
                    series: vec![
                        Series {
                            label: "sec_rad".into(),
                            xs: report.grid.clone(),
                            ys: report.sec_rad.clone(),
                        },
                        Series {
                            label: "sec_tg".into(),
                            xs: report.grid.clone(),
                            ys: report.sec_tg.clone(),
                        },
                    ],
                    markers: Vec::new(),
                };
                write_out(cli, "curvature.svg", &plot(&data, PlotKind::Curvature)?)?;
            }
            if !report.is_nonpositive {
                return Err(CliError::Check(format!(
                    "`{spec}` has positive curvature {} at r = {}",
                    report.worst_violation, report.worst_radius
                )));
            }
            Ok(())
        }
        WarpCommand::Sample { spec, rmax, n, out } => {
            if !(*rmax > 0.0) || *n == 0 {
                return Err(CliError::Usage(
                    "warp sample needs --rmax > 0 and --n ≥ 1".into(),
                ));
            }
            let w = parse_warp(spec)?;
            let knots: Vec<f64> = (0..=*n).map(|i| rmax * i as f64 / *n as f64).collect();
            write_out(cli, out, &SampledWarp::sample(&w, &knots)?.to_csv())
        }
    }
}

fn glue_cmd(cli: &Cli, args: &GlueArgs) -> CliResult<()> {
    let mut spec = GlueSpec::new(
        parse_warp(&args.rho)?,
        parse_warp(&args.sigma)?,
        args.rbar,
        args.r,
    );
    spec.delta = args.delta;
    spec.k_max = args.kmax;
    if let Some(t) = cli.tol {
        spec.value_tol = t;
    }
    let (gw, mut cert) = glue(&spec)?;
    let grid = certification_grid(&gw, args.n);
    if args.n != 4000 {
        cert = certify(&gw, &grid, spec.value_tol)?;
    }
    write_out(cli, "tau.csv", &gw.to_sampled(&grid)?.to_csv())?;
    write_out(cli, "certificate.json", &json(&cert)?)?;
    if args.plot {
        let sample = |w: &dyn Fn(f64) -> pharmonic::Result<f64>| -> CliResult<Vec<f64>> {
            Ok(grid
                .iter()
                .map(|&r| w(r))
                .collect::<pharmonic::Result<_>>()?)
        };
        let data = PlotData::Lines {
            series: vec![
                Series {
                    label: "tau".into(),
                    xs: grid.clone(),
                    ys: sample(&|r| Ok(gw.jet(r)?.value))?,
                },
                Series {
                    label: "rho".into(),
                    xs: grid.clone(),
                    ys: sample(&|r| Ok(gw.rho.jet(r)?.value))?,
                },
                Series {
                    label: "sigma_k".into(),
                    xs: grid.clone(),
                    ys: sample(&|r| Ok(gw.sigma_k.jet(r)?.value))?,
                },
            ],
            markers: gw.band_edges().to_vec(),
        };
        write_out(cli, "tau.svg", &plot(&data, PlotKind::Warp)?)?;
    }
    outln!(
        "k = {}, R1 = {}, R2 = {}, s = {}, pass = {}",
        cert.k,
        cert.r1,
        cert.r2,
        cert.s,
        cert.pass
    );
    if !cert.pass {
        return Err(CliError::Check(format!(
            "glue certificate failed: min second difference {}, min τ′−1 {}, head {}, tail {}, max curvature {}",
            cert.min_second_difference, cert.min_slope_minus_one, cert.head_mismatch, cert.tail_mismatch, cert.max_curvature
        )));
    }
    Ok(())
}

fn blend(cli: &Cli, args: &BlendArgs) -> CliResult<()> {
    let grid = PolarMetricGrid::from_csv_str(&read_text(&args.metric)?)?;
    let (k, c2) = match args.k {
        Some(k) => (k, blend_c2(&grid, args.r1, args.r2)?),
        None => find_k_blend(&grid, args.r1, args.r2, args.kmax)?,
    };
    let res = blend_metric(&grid, k, args.r1, args.r2, c2)?;
    write_out(cli, "blended.csv", &res.blended.to_csv("j_hat"))?;
    write_out(cli, "blend_cert.json", &json(&res.certificate)?)?;
    let c = &res.certificate;
    outln!(
        "k = {}, c2 = {}, min dt_j_hat = {}, pass = {}",
        c.k,
        c.c2,
        c.min_dt_j_hat,
        c.pass
    );
    if !c.pass {
        return Err(CliError::Check(format!(
            "∂_t ĵ = {} ≤ 0 at t = {}, θ = {}",
            c.min_dt_j_hat, c.argmin_t, c.argmin_theta
        )));
    }
    Ok(())
}

fn mesh(cli: &Cli, cmd: &MeshCommand) -> CliResult<()> {
    let (mut m, refinements, out) = match cmd {
        MeshCommand::Annulus {
            r0,
            r1,
            nr,
            ntheta,
            refine,
            out,
        } => (build_annulus(*r0, *r1, *nr, *ntheta)?, *refine, out),
        MeshCommand::Rect {
            w,
            h,
            nx,
            ny,
            refine,
            out,
        } => (build_rect(*w, *h, *nx, *ny)?, *refine, out),
    };
    for _ in 0..refinements {
        m = refine(&m)?;
    }
    write_out(cli, out, &m.to_text())?;
    outln!(
        "{}: {} vertices, {} triangles, h = {}",
        out,
        m.num_vertices(),
        m.num_triangles(),
        m.mesh_size()
    );
    Ok(())
}

struct Problem {
    mesh: TriMesh,
    chart: TargetChart,
    bc: BoundaryData,
    config: SolveConfig,
}

fn load_problem(cli: &Cli, args: &ProblemArgs) -> CliResult<Problem> {
    let mut config = SolveConfig::new(args.p);
    config.seed = cli.seed;
    config.quadrature = args.quadrature.into();
    if let Some(t) = cli.tol {
        config.grad_tol = t;
    }
    if let Some(n) = args.maxit {
        config.max_iter = n;
    }
    config.validate()?;
    let mesh = TriMesh::from_text(&read_text(&args.mesh)?)?;
    let bc = BoundaryData::from_csv_str(&read_text(&args.bc)?)?;
    bc.check(&mesh)?;
    let chart = chart_for(&args.target, bc.dim())?;
    Ok(Problem {
        mesh,
        chart,
        bc,
        config,
    })
}

fn solve_cmd(cli: &Cli, args: &SolveArgs) -> CliResult<()> {
    let pb = load_problem(cli, &args.problem)?;
    let (state, report) = solve(&pb.mesh, &pb.chart, &pb.bc, &pb.config)?;
    write_out(cli, "solution.csv", &state.to_csv())?;
    write_out(cli, "report.json", &json(&report)?)?;
    if args.plot {
        write_out(
            cli,
            "trace.svg",
            &plot(
                &PlotData::trace("energy", &report.energy_trace),
                PlotKind::Trace,
            )?,
        )?;
        let radius: Vec<f64> = (0..state.num_vertices())
            .map(|v| pb.chart.dist_to_pole(state.point(v)))
            .collect();
        let data = PlotData::Mesh {
            vertices: pb.mesh.vertices().to_vec(),
            triangles: pb.mesh.triangles().to_vec(),
            values: radius,
        };
        write_out(cli, "solution.svg", &plot(&data, PlotKind::Heatmap)?)?;
    }
    outln!(
        "energy = {}, residual = {:e}, iterations = {}, converged = {}",
        report.energy,
        report.residual,
        report.iterations,
        report.converged
    );
    if !report.converged {
        return Err(CliError::Check(format!(
            "solver stopped after {} iterations with residual {} > {}",
            report.iterations, report.residual, pb.config.grad_tol
        )));
    }
    Ok(())
}

fn verify(cli: &Cli, cmd: &VerifyCommand) -> CliResult<()> {
    match cmd {
        VerifyCommand::MaxPrinciple {
            solution,
            mesh,
            target,
        } => {
            let mesh = TriMesh::from_text(&read_text(mesh)?)?;
            let state = MapState::from_csv_str(&read_text(solution)?)?;
            let chart = chart_for(target, state.dim())?;
            let report = check_max_principle(&mesh, &chart, &state)?;
            out!("{}", json(&report)?);
            if !report.within_tolerance {
                return Err(CliError::Check(format!(
                    "interior exceeds boundary by {} > tolerance {}",
                    report.margin, report.tolerance
                )));
            }
            Ok(())
        }
        VerifyCommand::Uniqueness {
            problem,
            starts,
            spread_tol,
        } => {
            let pb = load_problem(cli, problem)?;
            let report = uniqueness_probe(&pb.mesh, &pb.chart, &pb.bc, &pb.config, *starts)?;
            out!("{}", json(&report)?);
            if !report.all_converged {
                return Err(CliError::Check("not every start converged".into()));
            }
            if !(report.spread <= *spread_tol) {
                return Err(CliError::Check(format!(
                    "solutions spread by {} > {spread_tol}",
                    report.spread
                )));
            }
            Ok(())
        }
    }
}

fn mtm(args: &MtmArgs) -> CliResult<()> {
    let chart = chart_for(&args.target, 2)?;
    if let Some(r0_seq) = &args.blowup {
        let psi = LoopMap::circle(args.ntheta, args.radius)?;
        let report = blowup_rate(
            &psi,
            &chart,
            args.p,
            r0_seq,
            args.r_outer,
            args.layers_per_decade,
        )?;
        out!("{}", json(&report)?);
        return Ok(());
    }
    let radius = args.radius;
    let rows = identity_table(
        &|n| LoopMap::circle(n, radius),
        &chart,
        args.p,
        args.r0,
        args.r_outer,
        args.nr0,
        args.ntheta0,
        args.refine,
    )?;
    outln!("level,nr,ntheta,loop_energy,extension_energy,ratio,defect");
    for r in rows {
        outln!(
            "{},{},{},{},{},{},{}",
            r.level,
            r.nr,
            r.ntheta,
            r.loop_energy,
            r.extension_energy,
            r.ratio,
            r.defect
        );
    }
    Ok(())
}
