//! Discrete chord-arc domains and the boundary geometry built on them.

pub mod certify;
pub mod domain;
pub mod point;
pub mod regions;

pub use certify::{
    certify, dyadic_scales, harnack_chain, quasi_hyperbolic_path, test_centers,
    ChordArcCertificate, HarnackBall, HarnackRow, ScaleRow, HARNACK_LAMBDAS,
};
pub use domain::{BoundaryFace, BoundaryGeometry, Cell, DiscreteDomain, DomainPreset};
pub use point::Point;
pub use regions::{
    carleson_region, check_prop_size, in_modified_cone, modified_cone, standard_cone,
    truncated_cone, Region, RegionKind, SurfaceBall,
};

/// Default aperture.
pub const DEFAULT_APERTURE: f64 = 1.0;
