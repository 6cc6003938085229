//! Measured Hardy ratios `∫|w|²/δ² / ∫|∇w|²`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::mesh::FeMesh;
use crate::error::{Error, Result};
use crate::geometry::{point, DiscreteDomain};
use crate::linalg::{dotc, norm2, LinearSolver};

const INVERSE_ITERATIONS: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HardyTest {
    /// Discrete first Dirichlet eigenfunction, by inverse iteration against
    /// the lumped mass.
    FirstEigenfunction,
    /// `(δ(c) − |x − c|)₊` with `c` the volume centroid.
    Tent,
    /// Nodal values of `δ`, zeroed on boundary nodes.
    DistanceProfile,
    /// Explicit nodal values; must vanish on boundary nodes.
    Nodal(Vec<Complex64>),
}

impl HardyTest {
    pub fn name(&self) -> &'static str {
        match self {
            HardyTest::FirstEigenfunction => "first_eigenfunction",
            HardyTest::Tent => "tent",
            HardyTest::DistanceProfile => "distance_profile",
            HardyTest::Nodal(_) => "nodal",
        }
    }
}

/// The shipped test family.
pub fn standard_hardy_family() -> Vec<HardyTest> {
    vec![HardyTest::FirstEigenfunction, HardyTest::Tent, HardyTest::DistanceProfile]
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct HardyRow {
    pub test: String,
    /// `None` when the member is identically zero.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct HardyReport {
    /// Largest ratio over the non-degenerate members, 0 if there are none.
    pub constant: f64,
    pub rows: Vec<HardyRow>,
}

fn first_eigenfunction(mesh: &FeMesh, gram: &crate::linalg::CsrMatrix) -> Result<Vec<Complex64>> {
    let interior = mesh.interior_nodes();
    let g_ii = gram.submatrix(interior, interior);
    let mass_all = mesh.lumped_mass();
    let mass: Vec<f64> = interior.iter().map(|&n| mass_all[n]).collect();
    let solver = LinearSolver::new(g_ii, true)?;
    let mut x = vec![Complex64::new(1.0, 0.0); interior.len()];
    for _ in 0..INVERSE_ITERATIONS {
        let rhs: Vec<Complex64> = x.iter().zip(&mass).map(|(v, m)| v * *m).collect();
        let (mut y, _) = solver.solve(&rhs)?;
        let n = norm2(&y);
        y.iter_mut().for_each(|v| *v /= n);
        x = y;
    }
    let mut full = vec![Complex64::new(0.0, 0.0); mesh.node_count()];
    for (&n, v) in interior.iter().zip(&x) {
        full[n] = *v;
    }
    Ok(full)
}

fn member_values(domain: &DiscreteDomain, mesh: &FeMesh, gram: &crate::linalg::CsrMatrix, test: &HardyTest) -> Result<Vec<Complex64>> {
    let zero = Complex64::new(0.0, 0.0);
    Ok(match test {
        HardyTest::FirstEigenfunction => first_eigenfunction(mesh, gram)?,
        HardyTest::Tent => {
            let c = domain.centroid();
            let r = domain.boundary_distance(&c);
            (0..mesh.node_count())
                .map(|n| {
                    if mesh.is_boundary(n) {
                        return zero;
                    }
                    Complex64::new((r - point::dist(&mesh.node_position(n), &c)).max(0.0), 0.0)
                })
                .collect()
        }
        HardyTest::DistanceProfile => (0..mesh.node_count())
            .map(|n| {
                if mesh.is_boundary(n) {
                    zero
                } else {
                    Complex64::new(domain.boundary_distance(&mesh.node_position(n)), 0.0)
                }
            })
            .collect(),
        HardyTest::Nodal(v) => {
            if v.len() != mesh.node_count() {
                return Err(Error::Domain(format!(
                    "test function has {} values for {} nodes",
                    v.len(),
                    mesh.node_count()
                )));
            }
            if mesh.boundary_nodes().iter().any(|&n| v[n] != zero) {
                return Err(Error::Domain("test function does not vanish on the boundary".into()));
            }
            v.clone()
        }
    })
}

/// Hardy ratios of `family` on the mesh of `domain`.
pub fn hardy_check(domain: &DiscreteDomain, family: &[HardyTest]) -> Result<HardyReport> {
    let mesh = FeMesh::new(domain);
    let gram = mesh.laplace_stiffness();
    let weight = mesh.hardy_matrix();
    let mut rows = Vec::with_capacity(family.len());
    for test in family {
        let w = member_values(domain, &mesh, &gram, test)?;
        let energy = dotc(&w, &gram.matvec(&w)).re;
        let ratio = if energy <= 0.0 {
            None
        } else {
            Some(dotc(&w, &weight.matvec(&w)).re / energy)
        };
        rows.push(HardyRow {
            test: test.name().into(),
            ratio,
        });
    }
    let constant = rows.iter().filter_map(|r| r.ratio).fold(0.0, f64::max);
    Ok(HardyReport { constant, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainPreset;

    #[test]
    fn zero_member_is_skipped() {
        let d = DiscreteDomain::build(&DomainPreset::Square { side: 1.0 }, 1.0 / 8.0).unwrap();
        let n = FeMesh::new(&d).node_count();
        let r = hardy_check(&d, &[HardyTest::Nodal(vec![Complex64::new(0.0, 0.0); n])]).unwrap();
        assert_eq!(r.rows[0].ratio, None);
        assert_eq!(r.constant, 0.0);
        let bad = vec![Complex64::new(1.0, 0.0); n];
        assert!(matches!(hardy_check(&d, &[HardyTest::Nodal(bad)]), Err(Error::Domain(_))));
    }

    #[test]
    fn eigenfunction_ratio_is_stable() {
        let mut ratios = Vec::new();
        for h in [1.0 / 16.0, 1.0 / 32.0] {
            let d = DiscreteDomain::build(&DomainPreset::Square { side: 1.0 }, h).unwrap();
            let r = hardy_check(&d, &standard_hardy_family()).unwrap();
            ratios.push(r.rows.iter().map(|r| r.ratio.unwrap()).collect::<Vec<_>>());
        }
        for (a, b) in ratios[0].iter().zip(&ratios[1]) {
            assert!(((a - b) / b).abs() < 0.1, "{a} vs {b}");
        }
    }
}
