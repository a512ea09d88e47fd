pub mod driver;
pub mod error;
pub mod fem;
pub mod linsolve;
pub mod mesh;
pub mod postproc;

pub use error::{Error, Result};
pub mod solve;
pub mod womersley;
