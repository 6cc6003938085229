//! Finite element solver for `∂_i(A_ij ∂_j u) + B_i ∂_i u = 0` with complex
//! coefficients.

pub mod assemble;
pub mod coercivity;
pub mod data;
pub mod drift;
pub mod hardy;
pub mod mesh;
pub mod solve;

pub use assemble::{assemble, EllipticSystem};
pub use coercivity::{CoercivityReport, DISAGREEMENT_TOL};
pub use data::{standard_family, BoundaryData, DataFamily, Polynomial};
pub use drift::{DriftField, DriftProfile, DriftRule, DriftSpec};
pub use hardy::{hardy_check, standard_hardy_family, HardyReport, HardyRow, HardyTest};
pub use mesh::{kuhn_simplices, FeMesh, KuhnSimplex};
pub use solve::{SolutionField, SolutionHeader};
