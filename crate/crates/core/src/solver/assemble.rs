//! Galerkin assembly of `𝓑[u, w̄] = ∫ A∇u·∇w̄ + (B·∇u) w̄`.

use std::sync::OnceLock;

use num_complex::Complex64;

use super::coercivity::CoercivityReport;
use super::drift::DriftField;
use super::mesh::FeMesh;
use crate::ellipticity::MatrixField;
use crate::error::{Error, Result};
use crate::geometry::DiscreteDomain;
use crate::linalg::{CsrMatrix, LinearSolver};

/// The assembled operator together with its interior/boundary blocks.
///
/// Test functions are conjugated. For the real nodal basis this coincides
/// with the unconjugated bilinear pairing.
#[derive(Debug)]
pub struct EllipticSystem {
    pub(crate) mesh: FeMesh,
    pub(crate) field: MatrixField,
    pub(crate) drift: DriftField,
    pub(crate) effective_k: f64,
    /// Full operator on all nodes.
    pub(crate) matrix: CsrMatrix,
    /// Gradient Gram matrix on all nodes.
    pub(crate) gram: CsrMatrix,
    /// Position of each node in the interior ordering, `usize::MAX` on the boundary.
    pub(crate) interior_slot: Vec<usize>,
    pub(crate) k_ii: CsrMatrix,
    pub(crate) k_ib: CsrMatrix,
    pub(crate) g_ii: CsrMatrix,
    pub(crate) margin: OnceLock<CoercivityReport>,
    pub(crate) operator_solver: OnceLock<LinearSolver>,
    pub(crate) gram_solver: OnceLock<LinearSolver>,
}

fn drift_block(b: &[Complex64; 3], grad: &[Vec<f64>], dim: usize, h: f64, vol: f64) -> Vec<Complex64> {
    let m = dim + 1;
    let w = vol / m as f64;
    let mut out = vec![Complex64::new(0.0, 0.0); m * m];
    for j in 0..m {
        let s: Complex64 = (0..dim).map(|a| b[a] * grad[a][j]).sum::<Complex64>() / h;
        for i in 0..m {
            out[i * m + j] = s * w;
        }
    }
    out
}

/// Assembles the operator of `field` and `drift` on the Kuhn mesh of `domain`.
pub fn assemble(field: &MatrixField, drift: &DriftField, domain: &DiscreteDomain) -> Result<EllipticSystem> {
    let dim = domain.dim();
    if field.dim() != dim {
        return Err(Error::Config(format!(
            "coefficient field has dimension {}, domain has dimension {dim}",
            field.dim()
        )));
    }
    if let Some(n) = field.sample_count() {
        if n != domain.cells().len() {
            return Err(Error::Config(format!(
                "sampled field has {n} cells, domain has {}",
                domain.cells().len()
            )));
        }
    }
    let mesh = FeMesh::new(domain);
    let h = mesh.h();
    let with_drift = !drift.is_zero();
    let matrix = mesh.assemble(|cell, simplex, vol| {
        let a = field.at_cell(cell);
        let m = dim + 1;
        let g = &simplex.grad;
        let mut k = vec![Complex64::new(0.0, 0.0); m * m];
        for i in 0..m {
            for j in 0..m {
                let mut s = Complex64::new(0.0, 0.0);
                for ai in 0..dim {
                    if g[ai][i] == 0.0 {
                        continue;
                    }
                    for bj in 0..dim {
                        s += a.get(ai, bj) * (g[bj][j] * g[ai][i]);
                    }
                }
                k[i * m + j] = s * (vol / (h * h));
            }
        }
        if with_drift {
            let d = drift_block(drift.at_cell(cell), g, dim, h, vol);
            k.iter_mut().zip(d).for_each(|(x, y)| *x += y);
        }
        k
    });
    let gram = mesh.laplace_stiffness();
    let interior = mesh.interior_nodes().to_vec();
    if interior.is_empty() {
        return Err(Error::Degenerate("mesh has no interior nodes".into()));
    }
    let boundary = mesh.boundary_nodes().to_vec();
    let mut interior_slot = vec![usize::MAX; mesh.node_count()];
    for (k, &n) in interior.iter().enumerate() {
        interior_slot[n] = k;
    }
    let k_ii = matrix.submatrix(&interior, &interior);
    let k_ib = matrix.submatrix(&interior, &boundary);
    let g_ii = gram.submatrix(&interior, &interior);
    Ok(EllipticSystem {
        effective_k: drift.effective_k(domain),
        mesh,
        field: field.clone(),
        drift: drift.clone(),
        matrix,
        gram,
        interior_slot,
        k_ii,
        k_ib,
        g_ii,
        margin: OnceLock::new(),
        operator_solver: OnceLock::new(),
        gram_solver: OnceLock::new(),
    })
}

impl EllipticSystem {
    pub fn mesh(&self) -> &FeMesh {
        &self.mesh
    }

    pub fn field(&self) -> &MatrixField {
        &self.field
    }

    pub fn drift(&self) -> &DriftField {
        &self.drift
    }

    /// `sup |B| δ` over cells.
    pub fn effective_k(&self) -> f64 {
        self.effective_k
    }

    /// Operator on all nodes: row = test function, column = trial function.
    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn gram(&self) -> &CsrMatrix {
        &self.gram
    }

    pub fn interior_matrix(&self) -> &CsrMatrix {
        &self.k_ii
    }

    pub fn interior_gram(&self) -> &CsrMatrix {
        &self.g_ii
    }

    pub fn interior_count(&self) -> usize {
        self.k_ii.n_rows()
    }

    /// Interior index of node `n`, if it is interior.
    pub fn interior_slot(&self, n: usize) -> Option<usize> {
        match self.interior_slot[n] {
            usize::MAX => None,
            k => Some(k),
        }
    }

    pub(crate) fn gram_solver(&self) -> Result<&LinearSolver> {
        if let Some(s) = self.gram_solver.get() {
            return Ok(s);
        }
        let s = LinearSolver::new(self.g_ii.clone(), true)?;
        Ok(self.gram_solver.get_or_init(|| s))
    }

    pub(crate) fn operator_solver(&self) -> Result<&LinearSolver> {
        if let Some(s) = self.operator_solver.get() {
            return Ok(s);
        }
        let hermitian = self.k_ii.hermitian_defect() <= 1e-14 * self.k_ii.max_abs();
        let s = LinearSolver::new(self.k_ii.clone(), hermitian)?;
        Ok(self.operator_solver.get_or_init(|| s))
    }

    /// Operator assembled without the drift term.
    pub fn without_drift(&self, domain: &DiscreteDomain) -> Result<EllipticSystem> {
        assemble(&self.field, &DriftField::build(domain, &super::drift::DriftSpec::zero())?, domain)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ellipticity::ComplexMatrix;
    use crate::geometry::DomainPreset;
    use crate::solver::drift::DriftSpec;

    fn square(h: f64) -> DiscreteDomain {
        DiscreteDomain::build(&DomainPreset::Square { side: 1.0 }, h).unwrap()
    }

    #[test]
    fn laplacian_rows_sum_to_zero() {
        let d = square(1.0 / 8.0);
        let f = MatrixField::constant(ComplexMatrix::identity(2)).unwrap();
        let s = assemble(&f, &DriftField::build(&d, &DriftSpec::zero()).unwrap(), &d).unwrap();
        assert!(s.matrix().combine(Complex64::new(1.0, 0.0), s.gram(), Complex64::new(-1.0, 0.0))
            .unwrap()
            .max_abs()
            < 1e-14);
        let ones = vec![Complex64::new(1.0, 0.0); s.mesh().node_count()];
        for (i, v) in s.matrix().matvec(&ones).iter().enumerate() {
            if !s.mesh().is_boundary(i) {
                assert!(v.norm() < 1e-13);
            }
        }
    }

    #[test]
    fn complex_scalar_scales_system() {
        let d = square(1.0 / 8.0);
        let zero = DriftField::build(&d, &DriftSpec::zero()).unwrap();
        let z = Complex64::new(1.0, 1.0);
        let a = assemble(&MatrixField::constant(ComplexMatrix::identity(2)).unwrap(), &zero, &d).unwrap();
        let b = assemble(&MatrixField::constant(ComplexMatrix::scalar(2, z)).unwrap(), &zero, &d).unwrap();
        let diff = b.matrix().combine(Complex64::new(1.0, 0.0), &a.matrix().scale(z), -Complex64::new(1.0, 0.0)).unwrap();
        assert!(diff.max_abs() < 1e-14);
    }

    #[test]
    fn drift_rows_annihilate_constants() {
        let d = DiscreteDomain::build(&DomainPreset::LShape, 1.0 / 8.0).unwrap();
        let f = MatrixField::constant(ComplexMatrix::identity(2)).unwrap();
        let s = assemble(&f, &DriftField::build(&d, &DriftSpec::radial_inward(0.3)).unwrap(), &d).unwrap();
        assert!(s.matrix().hermitian_defect() > 0.0);
        let ones = vec![Complex64::new(1.0, 0.0); s.mesh().node_count()];
        assert!(s.matrix().matvec(&ones).iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn dimension_mismatch() {
        let d = square(1.0 / 8.0);
        let f = MatrixField::constant(ComplexMatrix::identity(3)).unwrap();
        let zero = DriftField::build(&d, &DriftSpec::zero()).unwrap();
        assert!(matches!(assemble(&f, &zero, &d), Err(Error::Config(_))));
    }
}
