//! Canonical driven-flow benchmarks, verification sweeps and run reports.
//!
//! A benchmark is a pipe (3D) or plane channel (2D) with patches `inlet`,
//! `outlet` and `wall`, no-slip walls, a zero-traction outlet and a uniform
//! inlet pressure `h`. The inlet traction is therefore `-h n` with `n` the
//! outward normal, which drives flow from inlet to outlet.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use indexmap::IndexMap;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{assemble, CaseConfig, DEFAULT_C_STAB, DEFAULT_MAX_ITERATIONS, DEFAULT_TOLERANCE};
use crate::linsolve::SolveReport;
use crate::mesh::{generate_channel, generate_pipe, read_mesh, BoundaryCondition, BoundaryKind, Mesh, PipeResolution};
use crate::postproc::{
    channel_error_norm, mass_imbalance, patch_flow_rate, pipe_error_norm, PipeGeometry, SolutionField,
};
use crate::solve::solve_system;
use crate::womersley::{ChannelReference, WomersleyReference};

/// The Womersley numbers of the standard verification grid.
pub fn standard_alphas() -> Vec<f64> {
    let mut a = vec![0.0, 2f64.sqrt()];
    let mut v = 2.0;
    while v <= 32.0 {
        a.push(v);
        a.push(v * 2f64.sqrt());
        v *= 2.0;
    }
    a.pop();
    a
}

pub const BENCHMARK_PATCHES: [&str; 3] = ["inlet", "outlet", "wall"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    Pipe,
    Channel,
}

/// A pipe or channel mesh together with the fluid constants and the inlet
/// pressure of the benchmark.
#[derive(Debug, Clone)]
pub struct Benchmark {
    pub geometry: Geometry,
    pub mesh: Arc<Mesh>,
    /// Pipe radius or channel half-height.
    pub radius: f64,
    pub length: f64,
    pub rho: f64,
    pub mu: f64,
    pub h: f64,
}

impl Benchmark {
    /// Recognizes the geometry from the mesh dimension and extent.
    pub fn new(mesh: Arc<Mesh>, rho: f64, mu: f64, h: f64) -> Result<Self> {
        for p in BENCHMARK_PATCHES {
            if !mesh.has_patch(p) {
                return Err(Error::UnknownPatch(p.to_string()));
            }
        }
        let (geometry, radius, length) = if mesh.dimension() == 3 {
            let g = PipeGeometry::from_mesh(&mesh)?;
            (Geometry::Pipe, g.radius, g.length)
        } else {
            let ext = |d: usize| {
                let lo = mesh.nodes().iter().map(|p| p[d]).fold(f64::INFINITY, f64::min);
                let hi = mesh.nodes().iter().map(|p| p[d]).fold(f64::NEG_INFINITY, f64::max);
                hi - lo
            };
            (Geometry::Channel, 0.5 * ext(1), ext(0))
        };
        Ok(Self {
            geometry,
            mesh,
            radius,
            length,
            rho,
            mu,
            h,
        })
    }

    fn axis(&self) -> usize {
        match self.geometry {
            Geometry::Pipe => 2,
            Geometry::Channel => 0,
        }
    }

    pub fn omega(&self, alpha: f64) -> f64 {
        alpha * alpha * self.mu / (self.rho * self.radius * self.radius)
    }

    pub fn alpha(&self, omega: f64) -> f64 {
        self.radius * (self.rho * omega / self.mu).sqrt()
    }

    /// Case configuration at Womersley number `alpha`.
    pub fn config(&self, alpha: f64, tolerance: f64, c_stab: f64, max_iterations: usize) -> CaseConfig {
        let dim = self.mesh.dimension();
        let zero = vec![0.0; dim];
        let mut drive = zero.clone();
        drive[self.axis()] = self.h;
        let mut config = CaseConfig::new(self.rho, self.mu, self.omega(alpha))
            .with_bc(BoundaryCondition::neumann("inlet", &drive, &zero))
            .with_bc(BoundaryCondition::neumann("outlet", &zero, &zero))
            .with_bc(BoundaryCondition::dirichlet("wall", &zero, &zero));
        config.solver_tolerance = tolerance;
        config.c_stab = c_stab;
        config.max_iterations = max_iterations;
        config
    }

    /// Reads back the benchmark from a configuration carrying the standard
    /// boundary conditions; `None` when the configuration is something else.
    pub fn from_config(mesh: Arc<Mesh>, config: &CaseConfig) -> Option<Self> {
        let probe = Self::new(mesh, config.rho, config.mu, 1.0).ok()?;
        let axis = probe.axis();
        let find = |name: &str| config.boundary_conditions.iter().find(|bc| bc.patch == name);
        let inlet = find("inlet")?;
        let wall = find("wall")?;
        let is_zero = |v: &[f64]| v.iter().all(|&x| x == 0.0);
        if inlet.kind != BoundaryKind::Neumann || !is_zero(&inlet.value_imag) {
            return None;
        }
        let lateral_zero = inlet.value_real.iter().enumerate().all(|(d, &v)| d == axis || v == 0.0);
        let h = *inlet.value_real.get(axis)?;
        if !lateral_zero || h == 0.0 {
            return None;
        }
        if wall.kind != BoundaryKind::Dirichlet || !is_zero(&wall.value_real) || !is_zero(&wall.value_imag) {
            return None;
        }
        if let Some(out) = find("outlet") {
            if out.kind != BoundaryKind::Neumann || !is_zero(&out.value_real) || !is_zero(&out.value_imag) {
                return None;
            }
        }
        Some(Self { h, ..probe })
    }

    pub fn pipe_reference(&self, alpha: f64) -> Result<WomersleyReference> {
        WomersleyReference::from_alpha(alpha, self.rho, self.mu, self.radius, self.length, self.h)
    }

    pub fn channel_reference(&self, alpha: f64) -> Result<ChannelReference> {
        ChannelReference::from_alpha(alpha, self.rho, self.mu, self.radius, self.length, self.h)
    }

    /// Analytic flow rate per unit depth (channel) or through the section
    /// (pipe), and its steady value.
    pub fn reference_flow_rate(&self, alpha: f64) -> Result<(Complex64, f64)> {
        match self.geometry {
            Geometry::Pipe => {
                let r = self.pipe_reference(alpha)?;
                Ok((r.flow_rate()?, r.steady_flow_rate()))
            }
            Geometry::Channel => {
                let r = self.channel_reference(alpha)?;
                let b = self.radius;
                let steady = 2.0 * self.h * b.powi(3) / (3.0 * self.mu * self.length);
                if alpha == 0.0 {
                    return Ok((Complex64::new(steady, 0.0), steady));
                }
                // the mean of 1 - cosh(ky)/cosh(kb) over (-b, b) is 1 - tanh(kb)/(kb)
                let rho_omega = self.rho * r.omega();
                let kb = Complex64::new(0.0, rho_omega / self.mu).sqrt() * b;
                let q = Complex64::new(0.0, -self.h / (self.length * rho_omega)) * (1.0 - kb.tanh() / kb) * (2.0 * b);
                Ok((q, steady))
            }
        }
    }

    /// Steady centerline velocity used for profile normalization.
    pub fn steady_centerline(&self) -> f64 {
        match self.geometry {
            Geometry::Pipe => self.h * self.radius * self.radius / (4.0 * self.mu * self.length),
            Geometry::Channel => self.h * self.radius * self.radius / (2.0 * self.mu * self.length),
        }
    }

    pub fn error_norm(&self, field: &SolutionField, alpha: f64) -> Result<f64> {
        match self.geometry {
            Geometry::Pipe => pipe_error_norm(field, &self.pipe_reference(alpha)?),
            Geometry::Channel => channel_error_norm(field, &self.channel_reference(alpha)?),
        }
    }

    /// Assembles, solves and evaluates one mode.
    pub fn run(&self, config: &CaseConfig) -> Result<BenchmarkRun> {
        let alpha = self.alpha(config.omega);
        let t0 = Instant::now();
        let system = assemble(&self.mesh, config)?;
        let t1 = Instant::now();
        let (fields, report) = solve_system(&system, config.solver_tolerance, config.max_iterations)?;
        let t2 = Instant::now();
        let mut field = SolutionField::new(self.mesh.clone(), fields, config.omega)?;
        field.alpha = Some(alpha);
        field.report = Some(report.clone());
        let q = patch_flow_rate(&field, "outlet")?;
        let (q_ref, q_steady) = self.reference_flow_rate(alpha)?;
        Ok(BenchmarkRun {
            alpha,
            omega: config.omega,
            error_norm: self.error_norm(&field, alpha)?,
            imbalance: mass_imbalance(&field, &BENCHMARK_PATCHES)?,
            q,
            q_ref,
            q_steady,
            report,
            assembly_seconds: (t1 - t0).as_secs_f64(),
            solve_seconds: (t2 - t1).as_secs_f64(),
            field,
        })
    }
}

/// Outcome of one benchmark mode.
#[derive(Debug, Clone)]
pub struct BenchmarkRun {
    pub alpha: f64,
    pub omega: f64,
    pub field: SolutionField,
    pub report: SolveReport,
    pub error_norm: f64,
    pub imbalance: f64,
    /// Computed outlet flow rate.
    pub q: Complex64,
    pub q_ref: Complex64,
    pub q_steady: f64,
    pub assembly_seconds: f64,
    pub solve_seconds: f64,
}

impl BenchmarkRun {
    pub fn verify_row(&self) -> VerifyRow {
        VerifyRow {
            alpha: self.alpha,
            error_norm: self.error_norm,
            q_r: self.q.re / self.q_steady,
            q_i: self.q.im / self.q_steady,
            q_ref_r: self.q_ref.re / self.q_steady,
            q_ref_i: self.q_ref.im / self.q_steady,
            iterations: self.report.iterations,
            converged: self.report.converged,
        }
    }
}

/// One row of a verification sweep; flow rates normalized by the steady
/// reference flow rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyRow {
    pub alpha: f64,
    pub error_norm: f64,
    pub q_r: f64,
    pub q_i: f64,
    pub q_ref_r: f64,
    pub q_ref_i: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub const VERIFY_HEADER: &str = "alpha,error_norm,q_r,q_i,q_ref_r,q_ref_i,iterations,converged";

impl VerifyRow {
    pub fn csv(&self) -> String {
        format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{}",
            self.alpha, self.error_norm, self.q_r, self.q_i, self.q_ref_r, self.q_ref_i, self.iterations, self.converged
        )
    }
}

/// Where the mesh of a sweep comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeshSource {
    Pipe { radius: f64, length: f64, target_elements: usize },
    Channel { height: f64, length: f64, n_y: usize, n_x: usize },
    File { path: PathBuf },
}

impl MeshSource {
    pub fn build(&self) -> Result<Mesh> {
        match self {
            MeshSource::Pipe {
                radius,
                length,
                target_elements,
            } => {
                let r = PipeResolution::for_target_elements(*radius, *length, *target_elements)?;
                generate_pipe(*radius, *length, r.n_radial, r.n_azimuthal, r.n_axial)
            }
            MeshSource::Channel { height, length, n_y, n_x } => generate_channel(*height, *length, *n_y, *n_x),
            MeshSource::File { path } => read_mesh(path),
        }
    }

    /// The same source at resolution `value`: the target element count for
    /// a pipe, the number of cells across a channel.
    fn at_resolution(&self, value: f64) -> Result<Self> {
        if !(value >= 1.0 && value.fract() == 0.0) {
            return Err(Error::Config(format!("mesh resolution must be a positive integer, got {value}")));
        }
        let n = value as usize;
        match self {
            MeshSource::Pipe { radius, length, .. } => Ok(MeshSource::Pipe {
                radius: *radius,
                length: *length,
                target_elements: n,
            }),
            MeshSource::Channel { height, length, .. } => Ok(MeshSource::Channel {
                height: *height,
                length: *length,
                n_y: n,
                n_x: ((n as f64 * length / height).round() as usize).max(1),
            }),
            MeshSource::File { .. } => Err(Error::Config("a mesh file cannot be swept over resolution".into())),
        }
    }
}

/// Fixed part of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseCase {
    pub mesh: MeshSource,
    pub alpha: f64,
    #[serde(default = "one")]
    pub rho: f64,
    #[serde(default = "one")]
    pub mu: f64,
    #[serde(default = "one")]
    pub h: f64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_c_stab")]
    pub c_stab: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
}

fn one() -> f64 {
    1.0
}
fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}
fn default_c_stab() -> f64 {
    DEFAULT_C_STAB
}
fn default_max_iterations() -> usize {
    DEFAULT_MAX_ITERATIONS
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Alpha,
    Tolerance,
    CStab,
    MeshResolution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    pub base: BaseCase,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub alpha: f64,
    pub error_norm: f64,
    pub imbalance: f64,
    pub iterations: usize,
    pub converged: bool,
    pub q_r: f64,
    pub q_i: f64,
}

pub const SWEEP_HEADER: &str = "value,alpha,error_norm,imbalance,iterations,converged,q_r,q_i";

impl SweepRow {
    pub fn csv(&self) -> String {
        format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{},{},{:.16e},{:.16e}",
            self.value, self.alpha, self.error_norm, self.imbalance, self.iterations, self.converged, self.q_r, self.q_i
        )
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Config("sweep values must not be empty".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("sweep values must be finite".into()));
        }
        let up = self.values.windows(2).all(|w| w[1] > w[0]);
        let down = self.values.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(Error::Config("sweep values must be strictly monotone".into()));
        }
        Ok(())
    }

    /// Runs every case in value order. With `parallel`, independent cases
    /// are spread over the thread pool; rows come back in the same order.
    pub fn run(&self, parallel: bool) -> Result<Vec<SweepRow>> {
        self.validate()?;
        let base = &self.base;
        let shared = match self.parameter {
            SweepParameter::MeshResolution => None,
            _ => Some(Arc::new(base.mesh.build()?)),
        };
        let case = |value: f64| -> Result<SweepRow> {
            let mesh = match &shared {
                Some(m) => m.clone(),
                None => Arc::new(base.mesh.at_resolution(value)?.build()?),
            };
            let bench = Benchmark::new(mesh, base.rho, base.mu, base.h)?;
            let (mut alpha, mut tol, mut c) = (base.alpha, base.tolerance, base.c_stab);
            match self.parameter {
                SweepParameter::Alpha => alpha = value,
                SweepParameter::Tolerance => tol = value,
                SweepParameter::CStab => c = value,
                SweepParameter::MeshResolution => {}
            }
            let config = bench.config(alpha, tol, c, base.max_iterations);
            config.validate()?;
            let run = bench.run(&config)?;
            Ok(SweepRow {
                value,
                alpha,
                error_norm: run.error_norm,
                imbalance: run.imbalance,
                iterations: run.report.iterations,
                converged: run.report.converged,
                q_r: run.q.re / run.q_steady,
                q_i: run.q.im / run.q_steady,
            })
        };
        if parallel {
            self.values.par_iter().map(|&v| case(v)).collect()
        } else {
            self.values.iter().map(|&v| case(v)).collect()
        }
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 || x.iter().chain(y).any(|&v| !(v > 0.0)) {
        return Err(Error::Invalid("log-log fit needs at least two positive pairs".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshStats {
    pub dimension: usize,
    pub nodes: usize,
    pub elements: usize,
}

impl MeshStats {
    pub fn of(mesh: &Mesh) -> Self {
        Self {
            dimension: mesh.dimension(),
            nodes: mesh.num_nodes(),
            elements: mesh.num_elements(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub assembly_seconds: f64,
    pub solve_seconds: f64,
}

/// Self-describing summary of one solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: CaseConfig,
    pub mesh: MeshStats,
    pub geometry: Option<Geometry>,
    pub alpha: Option<f64>,
    pub omega: f64,
    pub solver: SolveReport,
    /// Outward flow rate `[re, im]` through every patch.
    pub flow_rates: IndexMap<String, [f64; 2]>,
    pub imbalance: Option<f64>,
    pub error_norm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timings: Option<Timings>,
}

/// Solves an arbitrary case and evaluates everything that applies to it.
pub struct CaseRun {
    pub field: SolutionField,
    pub report: RunReport,
    pub benchmark: Option<Benchmark>,
}

pub fn run_case(mesh: Arc<Mesh>, config: &CaseConfig, with_timings: bool) -> Result<CaseRun> {
    let t0 = Instant::now();
    let system = assemble(&mesh, config)?;
    let t1 = Instant::now();
    let (fields, solver) = solve_system(&system, config.solver_tolerance, config.max_iterations)?;
    let t2 = Instant::now();
    let mut field = SolutionField::new(mesh.clone(), fields, config.omega)?;
    let benchmark = Benchmark::from_config(mesh.clone(), config);
    let alpha = benchmark.as_ref().map(|b| b.alpha(config.omega));
    field.alpha = alpha;
    field.report = Some(solver.clone());
    let mut flow_rates = IndexMap::new();
    let mut flows = Vec::new();
    for name in mesh.patch_names() {
        let q = patch_flow_rate(&field, name)?;
        flows.push(q);
        flow_rates.insert(name.to_string(), [q.re, q.im]);
    }
    let imbalance = (flows.len() >= 2).then(|| crate::postproc::imbalance(&flows));
    let error_norm = match (&benchmark, alpha) {
        (Some(b), Some(a)) => Some(b.error_norm(&field, a)?),
        _ => None,
    };
    let report = RunReport {
        config: config.clone(),
        mesh: MeshStats::of(&mesh),
        geometry: benchmark.as_ref().map(|b| b.geometry),
        alpha,
        omega: config.omega,
        solver,
        flow_rates,
        imbalance,
        error_norm,
        timings: with_timings.then(|| Timings {
            assembly_seconds: (t1 - t0).as_secs_f64(),
            solve_seconds: (t2 - t1).as_secs_f64(),
        }),
    };
    Ok(CaseRun {
        field,
        report,
        benchmark,
    })
}
