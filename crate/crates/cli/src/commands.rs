use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use freqstokes_core::driver::{
    run_case, standard_alphas, BaseCase, Benchmark, MeshSource, SweepParameter, SweepSpec, SWEEP_HEADER,
    VERIFY_HEADER,
};
use freqstokes_core::fem::{assemble, CaseConfig};
use freqstokes_core::linsolve::write_matrix_market;
use freqstokes_core::mesh::{generate_channel, generate_pipe, read_mesh, write_mesh, Mesh, PipeResolution};
use freqstokes_core::postproc::{write_profile_csv, write_vtk, PipeGeometry, ProfileLine, SolutionField};
use freqstokes_core::womersley::WomersleyReference;
use freqstokes_core::Error;

use crate::{Fluid, Parameter, Shape, SolveArgs, SweepArgs, TableArgs, VerifyArgs};

pub const EXIT_OTHER: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_CONFIG: u8 = 3;
pub const EXIT_MESH: u8 = 4;
pub const EXIT_NOT_CONVERGED: u8 = 5;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Mesh(_)
            | Error::Schema { .. }
            | Error::DegenerateElement { .. }
            | Error::Generator(_)
            | Error::NotBoundaryFacet(_) => EXIT_MESH,
            Error::Config(_) | Error::UnknownPatch(_) | Error::Invalid(_) | Error::OutOfRange(_) => EXIT_CONFIG,
            _ => EXIT_OTHER,
        };
        Failure::new(code, e.to_string())
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn load_mesh(path: &Path) -> std::result::Result<Mesh, Failure> {
    read_mesh(path).map_err(|e| {
        let code = if matches!(e, Error::Io { .. }) { EXIT_OTHER } else { EXIT_MESH };
        Failure::new(code, format!("{}: {e}", path.display()))
    })
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::new(EXIT_OTHER, format!("{}: {e}", path.display()))
}

/// Writes `text` to `out`, or to standard output when `out` is `None`.
fn emit(out: Option<&PathBuf>, text: &str) -> CmdResult {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| io_failure(path, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::new(EXIT_OTHER, e.to_string())),
    }
}

pub fn generate(shape: Shape) -> CmdResult {
    let (mesh, out) = match shape {
        Shape::Pipe(a) => {
            let (nr, na, nz) = match (a.target_elements, a.n_radial, a.n_azimuthal, a.n_axial) {
                (Some(t), ..) => {
                    let r = PipeResolution::for_target_elements(a.radius, a.length, t)?;
                    (r.n_radial, r.n_azimuthal, r.n_axial)
                }
                (None, Some(r), Some(az), Some(z)) => (r, az, z),
                _ => {
                    return Err(Failure::new(
                        EXIT_USAGE,
                        "give --target-elements or all of --n-radial, --n-azimuthal, --n-axial",
                    ))
                }
            };
            (generate_pipe(a.radius, a.length, nr, na, nz)?, a.out)
        }
        Shape::Channel(a) => (generate_channel(a.height, a.length, a.ny, a.nx)?, a.out),
    };
    write_mesh(&mesh, &out)?;
    eprintln!(
        "wrote {} ({} nodes, {} elements)",
        out.display(),
        mesh.num_nodes(),
        mesh.num_elements()
    );
    Ok(())
}

/// Diameter through the axis for 3D meshes, a cross-section at mid-length
/// for 2D meshes.
fn profile_line(field: &SolutionField, scale: f64) -> ProfileLine {
    let mesh = &field.mesh;
    if mesh.dimension() == 3 {
        let radius = PipeGeometry::from_mesh(mesh).map(|g| g.radius).unwrap_or(1.0);
        return ProfileLine::pipe_diameter(field, radius, scale);
    }
    let xs = mesh.nodes().iter().map(|p| p[0]);
    let (lo, hi) = xs.clone().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(x), h.max(x)));
    let mid = 0.5 * (lo + hi);
    let x = xs.min_by(|a, b| (a - mid).abs().total_cmp(&(b - mid).abs())).unwrap_or(mid);
    let ys = mesh.nodes().iter().map(|p| p[1]);
    let (y0, y1) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), y| (l.min(y), h.max(y)));
    ProfileLine {
        start: [x, y0, 0.0],
        end: [x, y1, 0.0],
        tolerance: 1e-9 * (y1 - y0).max(f64::MIN_POSITIVE),
        component: 0,
        velocity_scale: scale,
    }
}

pub fn solve(args: SolveArgs) -> CmdResult {
    let config = CaseConfig::read(&args.case).map_err(|e| Failure::new(EXIT_CONFIG, e.to_string()))?;
    let mesh = Arc::new(load_mesh(&args.mesh)?);
    fs::create_dir_all(&args.out_dir).map_err(|e| io_failure(&args.out_dir, e))?;
    if let Some(path) = &args.dump_matrix {
        write_matrix_market(&assemble(&mesh, &config)?.matrix, path)?;
    }
    let run = run_case(mesh, &config, !args.reproducible)?;
    let scale = run.benchmark.as_ref().map(|b| b.steady_centerline()).unwrap_or(1.0);
    write_vtk(&run.field, args.out_dir.join("solution.vtk"))?;
    write_profile_csv(&run.field, &profile_line(&run.field, scale), args.out_dir.join("profile.csv"))?;
    let report_path = args.out_dir.join("report.json");
    let mut text = serde_json::to_string_pretty(&run.report).expect("report serializes");
    text.push('\n');
    fs::write(&report_path, text).map_err(|e| io_failure(&report_path, e))?;
    let solver = &run.report.solver;
    if !solver.converged {
        return Err(Failure::new(
            EXIT_NOT_CONVERGED,
            format!(
                "solver stopped ({:?}) after {} iterations at relative residual {:.3e}; report written to {}",
                solver.termination,
                solver.iterations,
                solver.achieved_relative_residual,
                report_path.display()
            ),
        ));
    }
    eprintln!(
        "converged in {} iterations; outputs in {}",
        solver.iterations,
        args.out_dir.display()
    );
    Ok(())
}

fn benchmark(path: &Path, fluid: &Fluid) -> std::result::Result<Benchmark, Failure> {
    let mesh = Arc::new(load_mesh(path)?);
    Benchmark::new(mesh, fluid.rho, fluid.mu, fluid.h)
        .map_err(|e| Failure::new(EXIT_MESH, format!("{}: not a benchmark mesh: {e}", path.display())))
}

pub fn verify(args: VerifyArgs) -> CmdResult {
    let bench = benchmark(&args.mesh, &args.fluid)?;
    let alphas = args.alphas.unwrap_or_else(standard_alphas);
    if alphas.is_empty() {
        return Err(Failure::new(EXIT_CONFIG, "no Womersley numbers given"));
    }
    let f = &args.fluid;
    let mut text = format!("{VERIFY_HEADER}\n");
    let mut stalled = Vec::new();
    for alpha in alphas {
        let config = bench.config(alpha, f.tolerance, f.c_stab, f.max_iterations);
        config.validate()?;
        let row = bench.run(&config)?.verify_row();
        if !row.converged {
            stalled.push(alpha);
        }
        text.push_str(&row.csv());
        text.push('\n');
    }
    emit(args.out.as_ref(), &text)?;
    if stalled.is_empty() {
        Ok(())
    } else {
        Err(Failure::new(EXIT_NOT_CONVERGED, format!("no convergence at alpha {stalled:?}")))
    }
}

pub fn sweep(args: SweepArgs) -> CmdResult {
    let mesh = match (&args.mesh, args.pipe_elements, args.channel_cells) {
        (Some(path), ..) => MeshSource::File { path: path.clone() },
        (None, Some(n), _) => MeshSource::Pipe {
            radius: args.size,
            length: args.length,
            target_elements: n,
        },
        (None, None, Some(n)) => MeshSource::Channel {
            height: args.size,
            length: args.length,
            n_y: n,
            n_x: ((n as f64 * args.length / args.size).round() as usize).max(1),
        },
        _ => unreachable!("clap requires one mesh source"),
    };
    let parameter = match args.parameter {
        Parameter::Alpha => SweepParameter::Alpha,
        Parameter::Tolerance => SweepParameter::Tolerance,
        Parameter::CStab => SweepParameter::CStab,
        Parameter::MeshResolution => SweepParameter::MeshResolution,
    };
    let f = &args.fluid;
    let spec = SweepSpec {
        parameter,
        values: args.values,
        base: BaseCase {
            mesh,
            alpha: args.alpha,
            rho: f.rho,
            mu: f.mu,
            h: f.h,
            tolerance: f.tolerance,
            c_stab: f.c_stab,
            max_iterations: f.max_iterations,
        },
    };
    let rows = spec.run(args.parallel)?;
    let mut text = format!("{SWEEP_HEADER}\n");
    for r in &rows {
        text.push_str(&r.csv());
        text.push('\n');
    }
    emit(args.out.as_ref(), &text)?;
    let stalled: Vec<f64> = rows.iter().filter(|r| !r.converged).map(|r| r.value).collect();
    if stalled.is_empty() {
        Ok(())
    } else {
        Err(Failure::new(EXIT_NOT_CONVERGED, format!("no convergence at values {stalled:?}")))
    }
}

pub fn womersley_table(args: TableArgs) -> CmdResult {
    let reference = WomersleyReference::from_alpha(args.alpha, 1.0, 1.0, 1.0, 1.0, 1.0)?;
    let mut text = String::from("r_over_R,u_r,u_i\n");
    for (s, re, im) in reference.profile_table(args.samples)? {
        text.push_str(&format!("{s:.16e},{re:.16e},{im:.16e}\n"));
    }
    emit(args.out.as_ref(), &text)
}
