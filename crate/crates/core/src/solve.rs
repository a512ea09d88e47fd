//! Jacobi-scaled conjugate-gradient solve of an assembled block system.

use crate::error::Result;
use crate::fem::{assemble, BlockSystem, CaseConfig, NodalFields};
use crate::linsolve::{conjugate_gradient, jacobi_scale, SolveReport};
use crate::mesh::Mesh;

/// Scales `system` symmetrically, runs CG on the scaled system with the
/// given relative tolerance, and maps the result back to nodal fields.
///
/// The tolerance applies to the residual of the scaled system.
pub fn solve_system(system: &BlockSystem, tolerance: f64, max_iterations: usize) -> Result<(NodalFields, SolveReport)> {
    let (scaled, scaling) = jacobi_scale(&system.matrix);
    let rhs = scaling.scale_rhs(&system.rhs);
    let (mut x, report) = conjugate_gradient(&scaled, &rhs, tolerance, max_iterations)?;
    scaling.unscale_solution(&mut x);
    Ok((system.expand_solution(&x), report))
}

/// Assembles and solves one frequency mode.
pub fn solve(mesh: &Mesh, config: &CaseConfig) -> Result<(NodalFields, SolveReport)> {
    let system = assemble(mesh, config)?;
    solve_system(&system, config.solver_tolerance, config.max_iterations)
}
