//! Block-sparse kernels, symmetric Jacobi scaling and conjugate gradient.

pub mod block;
pub mod cg;
pub mod jacobi;
pub mod mtx;

pub use block::{BlockPattern, BlockSparseMatrix};
pub use cg::{conjugate_gradient, dot, LinearOperator, SolveReport, Termination, RESIDUAL_REFRESH_INTERVAL};
pub use jacobi::{jacobi_scale, JacobiScaling};
pub use mtx::write_matrix_market;
