pub mod config;
pub mod ellipticity;
pub mod error;
pub mod experiments;
pub mod functionals;
pub mod geometry;
pub mod linalg;
pub mod solver;

pub use config::{Command, RunConfig};
pub use error::{Error, Result};
