//! `freqstokes`: mesh generation, frequency-domain Stokes solves,
//! verification against Womersley flow, and parameter sweeps.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::Failure;

/// Stabilized frequency-domain Stokes solver.
#[derive(Debug, Parser)]
#[command(name = "freqstokes", version, about)]
struct Cli {
    /// Upper bound on worker threads.
    #[arg(long, global = true, env = "FREQSTOKES_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a generated mesh in the neutral JSON format.
    Generate {
        #[command(subcommand)]
        shape: Shape,
    },
    /// Solve one case; writes solution.vtk, profile.csv and report.json.
    Solve(SolveArgs),
    /// Solve the pipe or channel benchmark over a range of Womersley numbers.
    Verify(VerifyArgs),
    /// Vary one parameter of the benchmark and tabulate the outcome.
    Sweep(SweepArgs),
    /// Tabulate the normalized Womersley pipe profile.
    WomersleyTable(TableArgs),
}

#[derive(Debug, Subcommand)]
enum Shape {
    /// Circular pipe along z with patches inlet, outlet and wall.
    Pipe(PipeArgs),
    /// Rectangular channel along x with patches inlet, outlet and wall.
    Channel(ChannelArgs),
}

#[derive(Debug, Args)]
struct PipeArgs {
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    #[arg(long, default_value_t = 15.0)]
    length: f64,
    /// Pick the resolution from an approximate element count.
    #[arg(long, conflicts_with_all = ["n_radial", "n_azimuthal", "n_axial"])]
    target_elements: Option<usize>,
    #[arg(long, requires_all = ["n_azimuthal", "n_axial"])]
    n_radial: Option<usize>,
    #[arg(long, requires_all = ["n_radial", "n_axial"])]
    n_azimuthal: Option<usize>,
    #[arg(long, requires_all = ["n_radial", "n_azimuthal"])]
    n_axial: Option<usize>,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ChannelArgs {
    #[arg(long, default_value_t = 1.0)]
    height: f64,
    #[arg(long, default_value_t = 10.0)]
    length: f64,
    #[arg(long)]
    ny: usize,
    #[arg(long)]
    nx: usize,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Case configuration (JSON).
    #[arg(long)]
    case: PathBuf,
    /// Mesh in the neutral JSON format.
    #[arg(long)]
    mesh: PathBuf,
    /// Directory for the outputs; created if missing.
    #[arg(long, short, default_value = ".")]
    out_dir: PathBuf,
    /// Omit timings so that repeated runs produce identical files.
    #[arg(long)]
    reproducible: bool,
    /// Also write the assembled matrix in Matrix Market format.
    #[arg(long)]
    dump_matrix: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Fluid {
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    /// Inlet pressure driving the flow.
    #[arg(long, default_value_t = 1.0)]
    h: f64,
    #[arg(long, default_value_t = freqstokes_core::fem::DEFAULT_TOLERANCE)]
    tolerance: f64,
    #[arg(long, default_value_t = freqstokes_core::fem::DEFAULT_C_STAB)]
    c_stab: f64,
    #[arg(long, default_value_t = freqstokes_core::fem::DEFAULT_MAX_ITERATIONS)]
    max_iterations: usize,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Pipe or channel mesh with patches inlet, outlet and wall.
    #[arg(long)]
    mesh: PathBuf,
    /// Womersley numbers; defaults to 0, sqrt 2, 2, ..., 32.
    #[arg(long, value_delimiter = ',')]
    alphas: Option<Vec<f64>>,
    #[command(flatten)]
    fluid: Fluid,
    /// Output CSV; standard output when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Parameter {
    Alpha,
    Tolerance,
    CStab,
    MeshResolution,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["mesh", "pipe_elements", "channel_cells"])))]
struct SweepArgs {
    #[arg(long, value_enum)]
    parameter: Parameter,
    /// Strictly monotone list of values.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    /// Mesh file.
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// Generated pipe with about this many elements.
    #[arg(long)]
    pipe_elements: Option<usize>,
    /// Generated channel with this many cells across its height.
    #[arg(long)]
    channel_cells: Option<usize>,
    /// Pipe radius or channel height of a generated mesh.
    #[arg(long, default_value_t = 1.0)]
    size: f64,
    /// Length of a generated mesh.
    #[arg(long, default_value_t = 15.0)]
    length: f64,
    /// Womersley number of every case unless swept.
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[command(flatten)]
    fluid: Fluid,
    /// Run independent cases concurrently.
    #[arg(long)]
    parallel: bool,
    /// Output CSV; standard output when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TableArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 21)]
    samples: usize,
    /// Output CSV; standard output when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: thread count must be at least 1");
            return ExitCode::from(commands::EXIT_USAGE);
        }
        // only fails if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let result = match cli.command {
        Command::Generate { shape } => commands::generate(shape),
        Command::Solve(args) => commands::solve(args),
        Command::Verify(args) => commands::verify(args),
        Command::Sweep(args) => commands::sweep(args),
        Command::WomersleyTable(args) => commands::womersley_table(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, message }) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
