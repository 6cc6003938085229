//! Dirichlet solves and solution fields.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use super::assemble::EllipticSystem;
use super::data::BoundaryData;
use crate::error::{Error, Result};
use crate::geometry::DiscreteDomain;
use crate::linalg::SolveStats;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionField {
    /// Values at mesh nodes.
    pub nodal: Vec<Complex64>,
    /// Mean simplex gradient per cell.
    pub gradient: Vec<[Complex64; 3]>,
    /// Mean corner value per cell.
    pub cell_values: Vec<Complex64>,
    /// Relative residual of the interior system.
    pub residual: f64,
    pub stats: SolveStats,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionHeader<'a> {
    pub operator: &'a str,
    pub drift_k: f64,
    pub domain: &'a str,
    pub h: f64,
    pub residual: f64,
    pub method: &'a str,
}

impl SolutionField {
    /// Writes `cell, re, im` rows of the cell values.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["cell", "re", "im"])?;
        for (i, v) in self.cell_values.iter().enumerate() {
            w.write_record(&[i.to_string(), v.re.to_string(), v.im.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_header(&self, path: &Path, system: &EllipticSystem, domain: &DiscreteDomain) -> Result<()> {
        let header = SolutionHeader {
            operator: system.field().label(),
            drift_k: system.effective_k(),
            domain: domain.preset().name(),
            h: domain.h(),
            residual: self.residual,
            method: &self.stats.method,
        };
        let mut f = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(&mut f, &header)?;
        writeln!(f)?;
        Ok(())
    }
}

impl EllipticSystem {
    /// Boundary node values of `data`.
    pub fn boundary_values(&self, domain: &DiscreteDomain, data: &BoundaryData) -> Vec<Complex64> {
        self.mesh
            .boundary_nodes()
            .iter()
            .map(|&n| data.node_value(domain, &self.mesh.node_position(n)))
            .collect()
    }

    /// Solves `𝓛u = 0` with `u = f` on boundary nodes. Refused unless the
    /// coercivity margin is positive.
    pub fn solve_dirichlet(&self, domain: &DiscreteDomain, data: &BoundaryData) -> Result<SolutionField> {
        let report = self.coercivity_margin()?;
        if report.margin <= 0.0 {
            return Err(Error::Refused(format!(
                "coercivity margin {:.3e} ≤ 0 (effective K = {:.3e})",
                report.margin, report.effective_k
            )));
        }
        let fb = self.boundary_values(domain, data);
        self.solve_with_boundary(&fb)
    }

    /// Solve with explicit boundary node values, ordered as
    /// [`FeMesh::boundary_nodes`](super::mesh::FeMesh::boundary_nodes).
    pub fn solve_with_boundary(&self, fb: &[Complex64]) -> Result<SolutionField> {
        let boundary = self.mesh.boundary_nodes();
        if fb.len() != boundary.len() {
            return Err(Error::Config(format!(
                "{} boundary values for {} boundary nodes",
                fb.len(),
                boundary.len()
            )));
        }
        let rhs: Vec<Complex64> = self.k_ib.matvec(fb).into_iter().map(|v| -v).collect();
        let (ui, stats) = self.operator_solver()?.solve(&rhs)?;
        let mut nodal = vec![Complex64::new(0.0, 0.0); self.mesh.node_count()];
        for (&n, v) in boundary.iter().zip(fb) {
            nodal[n] = *v;
        }
        for (&n, v) in self.mesh.interior_nodes().iter().zip(&ui) {
            nodal[n] = *v;
        }
        let cells = self.mesh.cell_count();
        let gradient = (0..cells).map(|c| self.mesh.cell_gradient(&nodal, c)).collect();
        let cell_values = (0..cells).map(|c| self.mesh.cell_value(&nodal, c)).collect();
        Ok(SolutionField {
            nodal,
            gradient,
            cell_values,
            residual: stats.relative_residual,
            stats,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ellipticity::{ComplexMatrix, MatrixField};
    use crate::geometry::DomainPreset;
    use crate::solver::{assemble, DataFamily, DriftField, DriftSpec, Polynomial};

    fn square(h: f64) -> DiscreteDomain {
        DiscreteDomain::build(&DomainPreset::Square { side: 1.0 }, h).unwrap()
    }

    fn solve(d: &DiscreteDomain, a: ComplexMatrix, drift: DriftSpec, fam: &DataFamily) -> Result<SolutionField> {
        let s = assemble(
            &MatrixField::constant(a).unwrap(),
            &DriftField::build(d, &drift).unwrap(),
            d,
        )
        .unwrap();
        s.solve_dirichlet(d, &BoundaryData::new(d, fam).unwrap())
    }

    #[test]
    fn constants_are_preserved() {
        let d = DiscreteDomain::build(&DomainPreset::LShape, 1.0 / 16.0).unwrap();
        let c = DataFamily::Constant { re: 2.0, im: -1.0 };
        let u = solve(&d, ComplexMatrix::scalar(2, Complex64::new(1.0, 0.5)), DriftSpec::radial_inward(0.1), &c)
            .unwrap();
        assert!(u.nodal.iter().all(|v| (v - Complex64::new(2.0, -1.0)).norm() < 1e-10));
        assert!(u.residual <= 1e-10);
    }

    #[test]
    fn quadratic_harmonic_is_reproduced() {
        let d = square(1.0 / 16.0);
        let fam = DataFamily::PolynomialTrace { polynomial: Polynomial::X2MinusY2 };
        let s = assemble(
            &MatrixField::constant(ComplexMatrix::identity(2)).unwrap(),
            &DriftField::build(&d, &DriftSpec::zero()).unwrap(),
            &d,
        )
        .unwrap();
        let u = s.solve_dirichlet(&d, &BoundaryData::new(&d, &fam).unwrap()).unwrap();
        for n in 0..s.mesh().node_count() {
            let p = s.mesh().node_position(n);
            assert!((u.nodal[n].re - (p[0] * p[0] - p[1] * p[1])).abs() < 1e-10);
        }
    }

    #[test]
    fn refused_when_margin_negative() {
        let d = square(1.0 / 16.0);
        let r = solve(&d, ComplexMatrix::identity(2), DriftSpec::constant_direction(5.0, vec![1.0, 0.0]), &DataFamily::constant(1.0));
        assert!(matches!(r, Err(Error::Refused(_))), "{r:?}");
    }
}
