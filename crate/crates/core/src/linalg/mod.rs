//! Sparse complex linear algebra used by the solver.

pub mod band;
pub mod krylov;
pub mod lanczos;
pub mod sparse;

use num_complex::Complex64;
use serde::Serialize;

pub use band::BandLu;
pub use krylov::{bicgstab, gmres, pcg, Ilu0, IterOutcome};
pub use lanczos::{lanczos_pencil, LanczosOutcome};
pub use sparse::{axpy, dotc, norm2, CsrMatrix};

use crate::error::{Error, Result};

/// Band storage above which the iterative path is taken.
pub const BAND_STORAGE_LIMIT: usize = 12_000_000;
/// Residual the solvers aim for.
pub const TARGET_RESIDUAL: f64 = 1e-12;
/// Residual above which a solve is reported as failed.
pub const ACCEPT_RESIDUAL: f64 = 1e-10;
const MAX_ITER: usize = 5000;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SolveStats {
    pub method: String,
    pub iterations: usize,
    pub relative_residual: f64,
}

#[derive(Debug)]
enum Backend {
    Band(BandLu),
    Krylov { ilu: Ilu0, hermitian: bool },
}

/// A square system prepared for repeated solves.
#[derive(Debug)]
pub struct LinearSolver {
    matrix: CsrMatrix,
    backend: Backend,
}

impl LinearSolver {
    /// Factors directly when the band fits in memory, otherwise prepares an
    /// ILU(0) preconditioner. `hermitian_pd` selects conjugate gradients.
    pub fn new(matrix: CsrMatrix, hermitian_pd: bool) -> Result<Self> {
        let backend = if BandLu::storage_for(&matrix) <= BAND_STORAGE_LIMIT {
            Backend::Band(BandLu::factor(&matrix)?)
        } else {
            Backend::Krylov {
                ilu: Ilu0::new(&matrix)?,
                hermitian: hermitian_pd,
            }
        };
        Ok(Self { matrix, backend })
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn is_direct(&self) -> bool {
        matches!(self.backend, Backend::Band(_))
    }

    pub fn solve(&self, b: &[Complex64]) -> Result<(Vec<Complex64>, SolveStats)> {
        let bnorm = norm2(b);
        if bnorm == 0.0 {
            return Ok((
                vec![Complex64::new(0.0, 0.0); b.len()],
                SolveStats {
                    method: "trivial".into(),
                    iterations: 0,
                    relative_residual: 0.0,
                },
            ));
        }
        let residual = |x: &[Complex64]| -> Vec<Complex64> {
            let ax = self.matrix.matvec(x);
            b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect()
        };
        match &self.backend {
            Backend::Band(lu) => {
                let mut x = lu.solve(b);
                let mut rel = norm2(&residual(&x)) / bnorm;
                let mut steps = 0;
                let mut history = vec![rel];
                while rel > TARGET_RESIDUAL && steps < 3 {
                    let dx = lu.solve(&residual(&x));
                    axpy(Complex64::new(1.0, 0.0), &dx, &mut x);
                    rel = norm2(&residual(&x)) / bnorm;
                    history.push(rel);
                    steps += 1;
                }
                if rel > ACCEPT_RESIDUAL {
                    return Err(Error::computation(
                        format!("band LU residual {rel:.3e} above {ACCEPT_RESIDUAL:e}"),
                        history,
                    ));
                }
                Ok((
                    x,
                    SolveStats {
                        method: "band_lu".into(),
                        iterations: steps,
                        relative_residual: rel,
                    },
                ))
            }
            Backend::Krylov { ilu, hermitian } => {
                let (mut out, mut method) = if *hermitian {
                    (pcg(&self.matrix, ilu, b, None, TARGET_RESIDUAL, MAX_ITER), "pcg")
                } else {
                    (bicgstab(&self.matrix, ilu, b, None, TARGET_RESIDUAL, MAX_ITER), "bicgstab")
                };
                let mut history = out.history.clone();
                if !out.converged {
                    let warm = out.x.clone();
                    out = gmres(&self.matrix, ilu, b, Some(&warm), TARGET_RESIDUAL, 60, MAX_ITER);
                    method = "gmres";
                    history.extend(&out.history);
                }
                let rel = norm2(&residual(&out.x)) / bnorm;
                if rel > ACCEPT_RESIDUAL {
                    return Err(Error::computation(
                        format!("{method} stagnated at relative residual {rel:.3e}"),
                        history,
                    ));
                }
                Ok((
                    out.x,
                    SolveStats {
                        method: method.into(),
                        iterations: history.len().saturating_sub(1),
                        relative_residual: rel,
                    },
                ))
            }
        }
    }
}
