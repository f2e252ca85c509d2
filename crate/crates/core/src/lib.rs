pub mod cones;
pub mod conformal;
mod descriptor;
pub mod diagnostics;
pub mod error;
pub mod linalg;
pub mod radial_solver;
pub mod symfun;

pub use error::{Error, Result, Violation};
