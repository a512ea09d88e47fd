//! Stabilized finite element discretization of the frequency-domain
//! Stokes problem on linear simplices.

pub mod assembly;
pub mod config;
pub mod element;

pub use assembly::{
    assemble, assemble_with, boundary_load, node_adjacency, stokes_pattern, AssemblyMode, BlockSystem, DofLayout,
    NodalFields, NodalLoad,
};
pub use config::{CaseConfig, DEFAULT_C_STAB, DEFAULT_MAX_ITERATIONS, DEFAULT_TOLERANCE};
pub use element::{
    covariant_metric, element_matrices, shape_gradients, stabilization_tau, CovariantMetric, ElementMatrices,
    ShapeGradients,
};
