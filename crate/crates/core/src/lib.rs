//! Low-rank decomposition by bi-dual convex programs and optimality certificates.

pub mod certificates;
pub mod cli;
pub mod error;
pub mod instances;
pub mod io;
pub mod linalg;
pub mod rng;
pub mod rstar;
pub mod solvers;

pub use error::{LrdError, Result};
pub use linalg::{DenseMatrix, SupportSet, SvdFactors, TangentSpace};
pub use rng::Rng;
