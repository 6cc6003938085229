//! Discrete coercivity: `inf Re 𝓑[u, ū] / ‖∇u‖²` over functions vanishing
//! on the boundary, and the Hardy-inequality lower bound for it.

use num_complex::Complex64;
use serde::Serialize;

use super::assemble::EllipticSystem;
use crate::error::{Error, Result};
use crate::linalg::lanczos_pencil;

const LANCZOS_STEPS: usize = 200;
const LANCZOS_SEED: u64 = 0x1a2c_a05e;
/// Slack allowed before the analytic bound is reported as exceeding the margin.
pub const DISAGREEMENT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CoercivityReport {
    /// `½ λ_min(Herm K_II, G_II)`; the factor matches the normalization of `λ₂`.
    pub margin: f64,
    /// `λ₂(A) − ½ K √C`, with `K = sup |B| δ` and `C` the discrete Hardy constant.
    pub analytic_bound: f64,
    pub lambda2: f64,
    pub effective_k: f64,
    /// `λ_max(M_δ, G)` on the interior space; absent without drift.
    pub hardy_constant: Option<f64>,
    /// Set when the analytic bound exceeds the measured margin.
    pub disagreement: bool,
    pub lanczos_steps: usize,
    pub lanczos_residual: f64,
}

impl EllipticSystem {
    /// Measured Hardy constant of the mesh: the largest `∫|w|²/δ² / ∫|∇w|²`
    /// over discrete `w` vanishing on the boundary.
    pub fn discrete_hardy_constant(&self) -> Result<f64> {
        let interior = self.mesh.interior_nodes().to_vec();
        let m = self.mesh.hardy_matrix().submatrix(&interior, &interior);
        let g = self.gram_solver()?;
        let out = lanczos_pencil(
            self.interior_count(),
            |v| m.matvec(v),
            |v| self.g_ii.matvec(v),
            |v| g.solve(v).map(|r| r.0),
            LANCZOS_STEPS,
            LANCZOS_SEED,
        )?;
        Ok(out.max)
    }

    /// Norm of the drift block as an operator on `(interior, G)`:
    /// `sup |⟨D u, w⟩| / (‖∇u‖ ‖∇w‖)`.
    pub fn drift_gram_norm(&self, domain: &crate::geometry::DiscreteDomain) -> Result<f64> {
        if self.drift.is_zero() {
            return Ok(0.0);
        }
        let base = self.without_drift(domain)?;
        let d = self
            .k_ii
            .combine(Complex64::new(1.0, 0.0), &base.k_ii, Complex64::new(-1.0, 0.0))?;
        let dh = d.adjoint();
        let g = self.gram_solver()?;
        let out = lanczos_pencil(
            self.interior_count(),
            |v| {
                let x = g.solve(&d.matvec(v)).map(|r| r.0).unwrap_or_else(|_| vec![Complex64::new(f64::NAN, 0.0); v.len()]);
                dh.matvec(&x)
            },
            |v| self.g_ii.matvec(v),
            |v| g.solve(v).map(|r| r.0),
            LANCZOS_STEPS,
            LANCZOS_SEED,
        )?;
        if !out.max.is_finite() {
            return Err(Error::computation("drift norm iteration failed", vec![out.max]));
        }
        Ok(out.max.max(0.0).sqrt())
    }

    /// Coercivity margin and its analytic lower bound; cached after the
    /// first call.
    pub fn coercivity_margin(&self) -> Result<CoercivityReport> {
        if let Some(r) = self.margin.get() {
            return Ok(r.clone());
        }
        let herm = self.k_ii.hermitian_part();
        let g = self.gram_solver()?;
        let out = lanczos_pencil(
            self.interior_count(),
            |v| herm.matvec(v),
            |v| self.g_ii.matvec(v),
            |v| g.solve(v).map(|r| r.0),
            LANCZOS_STEPS,
            LANCZOS_SEED,
        )?;
        if !out.min.is_finite() {
            return Err(Error::computation(
                "coercivity eigenvalue did not converge",
                vec![out.min, out.min_residual],
            ));
        }
        let margin = 0.5 * out.min;
        let lambda2 = self.field.lambda_p(2.0)?;
        let (hardy_constant, analytic_bound) = if self.effective_k > 0.0 {
            let c = self.discrete_hardy_constant()?;
            (Some(c), lambda2 - 0.5 * self.effective_k * c.sqrt())
        } else {
            (None, lambda2)
        };
        let report = CoercivityReport {
            margin,
            analytic_bound,
            lambda2,
            effective_k: self.effective_k,
            hardy_constant,
            disagreement: analytic_bound > margin + DISAGREEMENT_TOL,
            lanczos_steps: out.steps,
            lanczos_residual: out.min_residual,
        };
        Ok(self.margin.get_or_init(|| report).clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ellipticity::{ComplexMatrix, MatrixField};
    use crate::geometry::{DiscreteDomain, DomainPreset};
    use crate::solver::{assemble, DriftField, DriftSpec};

    fn system(a: ComplexMatrix, drift: DriftSpec, h: f64) -> (DiscreteDomain, EllipticSystem) {
        let d = DiscreteDomain::build(&DomainPreset::Square { side: 1.0 }, h).unwrap();
        let f = MatrixField::constant(a).unwrap();
        let s = assemble(&f, &DriftField::build(&d, &drift).unwrap(), &d).unwrap();
        (d, s)
    }

    #[test]
    fn margin_of_identity_and_complex_scalar() {
        for a in [ComplexMatrix::identity(2), ComplexMatrix::scalar(2, Complex64::new(1.0, 1.0))] {
            let (_, s) = system(a, DriftSpec::zero(), 1.0 / 16.0);
            let r = s.coercivity_margin().unwrap();
            assert!((r.margin - 0.5).abs() < 1e-8, "{r:?}");
            assert!(!r.disagreement);
        }
    }

    #[test]
    fn drift_margin_dominates_analytic_bound() {
        let (d, s) = system(ComplexMatrix::identity(2), DriftSpec::constant_direction(0.2, vec![1.0, 0.0]), 1.0 / 16.0);
        let r = s.coercivity_margin().unwrap();
        assert!(r.margin < 0.5 && r.margin > 0.0, "{r:?}");
        assert!(r.analytic_bound <= r.margin + DISAGREEMENT_TOL);
        let c = r.hardy_constant.unwrap();
        let norm = s.drift_gram_norm(&d).unwrap();
        assert!(norm <= 0.2 * c.sqrt() * (1.0 + 1e-6), "{norm} vs {}", 0.2 * c.sqrt());
    }
}
