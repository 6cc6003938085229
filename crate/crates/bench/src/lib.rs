//! Fixtures shared by the kernel benchmarks.

use pellipt_core::ellipticity::{MatrixField, MatrixPreset};
use pellipt_core::geometry::{DiscreteDomain, DomainPreset};
use pellipt_core::solver::{assemble, BoundaryData, DataFamily, DriftField, DriftSpec, EllipticSystem};

/// A discretized Dirichlet problem ready to solve.
pub struct Problem {
    pub domain: DiscreteDomain,
    pub field: MatrixField,
    pub drift: DriftField,
    pub data: BoundaryData,
}

impl Problem {
    pub fn new(preset: &DomainPreset, h: f64, matrix: &MatrixPreset) -> Self {
        let domain = DiscreteDomain::build(preset, h).expect("domain");
        let field = MatrixField::from_preset(matrix, domain.dim()).expect("matrix");
        let drift = DriftField::build(&domain, &DriftSpec::zero()).expect("drift");
        let family = DataFamily::RandomBumps {
            seed: 7,
            count: 5,
            scale: 0.25,
        };
        let data = BoundaryData::new(&domain, &family).expect("data");
        Self { domain, field, drift, data }
    }

    pub fn system(&self) -> EllipticSystem {
        assemble(&self.field, &self.drift, &self.domain).expect("assemble")
    }
}

pub fn unit_square() -> DomainPreset {
    DomainPreset::Square { side: 1.0 }
}

pub fn unit_cube() -> DomainPreset {
    DomainPreset::Cube { side: 1.0 }
}
