//! Shipped verification campaigns.

use serde::Serialize;

use super::localization::{localization_check, LocalizationRecord, DEFAULT_M};
use super::rh::{boundary_rh, interior_rh, spread, RHRecord, RhKind};
use super::scan::ScanSetup;
use crate::ellipticity::{MatrixField, MatrixPreset};
use crate::error::{Error, Result};
use crate::functionals::ntmax;
use crate::geometry::{point::dist, DiscreteDomain, DomainPreset, Point};
use crate::solver::{assemble, BoundaryData, DataFamily, DriftField, DriftSpec};

/// Largest `max/min` spread of a ratio across refinements counted as stable
/// for the reverse Hölder and localization campaigns.
pub const SPREAD_FACTOR: f64 = 2.0;

/// Mesh sizes `h, h/2, …` for `count` levels.
pub fn refinement_levels(h: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| h / (1u32 << k) as f64).collect()
}

fn to_vec(p: &Point, dim: usize) -> Vec<f64> {
    p[..dim].to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhSetup {
    pub domain: DomainPreset,
    pub levels: Vec<f64>,
    pub operators: Vec<MatrixPreset>,
    pub drifts: Vec<DriftSpec>,
    pub q: f64,
    pub ps: Vec<f64>,
    pub interior_center: Vec<f64>,
    pub interior_radius: f64,
    pub boundary_center: Vec<f64>,
    pub boundary_radius: f64,
    /// Datum for the interior balls.
    pub interior_data: DataFamily,
    /// Datum for the boundary ball; vanishes on its double.
    pub boundary_data: DataFamily,
}

impl RhSetup {
    /// Unit square, `A ∈ {I, (1+i)I}`, no drift and an inward radial drift
    /// with `K = 0.05`, three levels from
    /// `h = 1/32`, `q = 4`, `p ∈ {1/2, 1, 2}`.
    pub fn standard() -> Self {
        Self {
            domain: DomainPreset::Square { side: 1.0 },
            levels: refinement_levels(1.0 / 32.0, 3),
            operators: vec![MatrixPreset::Identity, MatrixPreset::ScalarComplex { tau: 1.0 }],
            drifts: vec![DriftSpec::zero(), DriftSpec::radial_inward(0.05)],
            q: 4.0,
            ps: vec![0.5, 1.0, 2.0],
            interior_center: vec![0.5, 0.5],
            interior_radius: 1.0 / 16.0,
            boundary_center: vec![0.5, 0.0],
            boundary_radius: 1.0 / 8.0,
            interior_data: DataFamily::RandomBumps {
                seed: 7,
                count: 5,
                scale: 0.25,
            },
            boundary_data: DataFamily::Atom {
                center: vec![0.5, 1.0],
                radius: 0.5,
            },
        }
    }

    /// Balls placed from the geometry of `domain`: the interior ball at the
    /// centroid with radius `δ/8`, the boundary ball at the nearest boundary
    /// point, and an atom on the far side.
    pub fn for_domain(
        preset: &DomainPreset,
        levels: Vec<f64>,
        operators: Vec<MatrixPreset>,
        drifts: Vec<DriftSpec>,
        q: f64,
        ps: Vec<f64>,
        seed: u64,
    ) -> Result<Self> {
        let h = *levels.first().ok_or_else(|| Error::Config("no refinement levels".into()))?;
        let domain = DiscreteDomain::build(preset, h)?;
        let dim = domain.dim();
        let c = domain.centroid();
        let delta = domain.delta(&c)?;
        let bc = domain.boundary().closest_point(&c);
        let mut mirror = [0.0; 3];
        for k in 0..3 {
            mirror[k] = 2.0 * c[k] - bc[k];
        }
        let far = domain.boundary().closest_point(&mirror);
        let gap = dist(&bc, &far);
        Ok(Self {
            domain: preset.clone(),
            levels,
            operators,
            drifts,
            q,
            ps,
            interior_center: to_vec(&c, dim),
            interior_radius: delta / 8.0,
            boundary_center: to_vec(&bc, dim),
            boundary_radius: gap / 8.0,
            interior_data: DataFamily::RandomBumps {
                seed,
                count: 5,
                scale: domain.diameter() / 4.0,
            },
            boundary_data: DataFamily::Atom {
                center: to_vec(&far, dim),
                radius: gap / 2.0,
            },
        })
    }
}

/// Spread of one ratio across the refinement levels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhStability {
    pub operator: String,
    pub drift_k: f64,
    pub kind: RhKind,
    pub p: f64,
    pub spread: Option<f64>,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhOutcome {
    pub records: Vec<RHRecord>,
    pub stability: Vec<RhStability>,
}

fn point_of(v: &[f64]) -> Point {
    let mut p = [0.0; 3];
    for (k, x) in v.iter().take(3).enumerate() {
        p[k] = *x;
    }
    p
}

/// Runs every (operator, K, level) combination and measures each ratio's
/// spread across levels.
pub fn rh_campaign(setup: &RhSetup) -> Result<RhOutcome> {
    let x_int = point_of(&setup.interior_center);
    let x_bdy = point_of(&setup.boundary_center);
    let mut records = Vec::new();
    for preset in &setup.operators {
        for spec in &setup.drifts {
            let k = spec.k;
            for (level, &h) in setup.levels.iter().enumerate() {
                let domain = DiscreteDomain::build(&setup.domain, h)?;
                let field = MatrixField::from_preset(preset, domain.dim())?;
                let drift = DriftField::build(&domain, spec)?;
                let system = assemble(&field, &drift, &domain)?;
                let f_int = BoundaryData::new(&domain, &setup.interior_data)?;
                let f_bdy = BoundaryData::new(&domain, &setup.boundary_data)?;
                let u_int = system.solve_dirichlet(&domain, &f_int)?;
                let u_bdy = system.solve_dirichlet(&domain, &f_bdy)?;
                for &p in &setup.ps {
                    let int = interior_rh(&domain, &u_int, &x_int, setup.interior_radius, setup.q, p, level)?;
                    let bdy = boundary_rh(
                        &domain,
                        &u_bdy,
                        &f_bdy,
                        &x_bdy,
                        setup.boundary_radius,
                        setup.q,
                        p,
                        level,
                    )?;
                    for r in int.into_iter().chain(bdy) {
                        // Gradient and Caccioppoli forms do not depend on p.
                        let repeated = matches!(r.kind, RhKind::InteriorGradient | RhKind::BoundaryCaccioppoli)
                            && p != setup.ps[0];
                        if !repeated {
                            records.push(r.tagged(field.label(), k));
                        }
                    }
                }
            }
        }
    }
    let mut stability = Vec::new();
    for r in records.iter().filter(|r| r.level == 0) {
        let series: Vec<&RHRecord> = records
            .iter()
            .filter(|s| s.operator == r.operator && s.drift_k == r.drift_k && s.kind == r.kind && s.p == r.p)
            .collect();
        let spread = spread(&series);
        let finite = series.iter().all(|s| s.ratio.is_some_and(f64::is_finite));
        stability.push(RhStability {
            operator: r.operator.clone(),
            drift_k: r.drift_k,
            kind: r.kind,
            p: r.p,
            spread,
            stable: finite && series.len() == setup.levels.len() && spread.is_some_and(|s| s <= SPREAD_FACTOR),
        });
    }
    Ok(RhOutcome { records, stability })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalizationSetup {
    pub domain: DomainPreset,
    pub h: f64,
    pub matrix: MatrixPreset,
    pub drift: DriftSpec,
    pub center: Vec<f64>,
    pub ds: Vec<f64>,
    pub p: f64,
    pub q: f64,
    pub a: f64,
    pub m: usize,
    pub data: DataFamily,
}

impl LocalizationSetup {
    /// `A = I` on a square of side 9 with `h = 1/32`, `Δ` centered at the
    /// bottom midpoint, `d ∈ {1/32, 1/16, 1/8}`, `q = 2`, `p = 4`, and an
    /// atom at the top midpoint.
    ///
    /// The side is large enough that `16mΔ` with `m = 4` and `d = 1/8`
    /// leaves the atom's support untouched.
    pub fn standard() -> Self {
        Self {
            domain: DomainPreset::Square { side: 9.0 },
            h: 1.0 / 32.0,
            matrix: MatrixPreset::Identity,
            drift: DriftSpec::zero(),
            center: vec![4.5, 0.0],
            ds: vec![1.0 / 32.0, 1.0 / 16.0, 1.0 / 8.0],
            p: 4.0,
            q: 2.0,
            a: 1.0,
            m: DEFAULT_M,
            data: DataFamily::Atom {
                center: vec![4.5, 9.0],
                radius: 1.0,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalizationOutcome {
    pub records: Vec<LocalizationRecord>,
    /// `max/min` of the ratios over the scales.
    pub spread: Option<f64>,
    pub stable: bool,
}

/// One solve and one `Ñ_{2,a}` sweep, then the estimate at each scale.
pub fn localization_campaign(setup: &LocalizationSetup) -> Result<LocalizationOutcome> {
    let domain = DiscreteDomain::build(&setup.domain, setup.h)?;
    let field = MatrixField::from_preset(&setup.matrix, domain.dim())?;
    let drift = DriftField::build(&domain, &setup.drift)?;
    let system = assemble(&field, &drift, &domain)?;
    let data = BoundaryData::new(&domain, &setup.data)?;
    let u = system.solve_dirichlet(&domain, &data)?;
    let nt = ntmax(&domain, &u.cell_values, 2.0, setup.a)?;
    let center = point_of(&setup.center);
    let records = setup
        .ds
        .iter()
        .map(|&d| localization_check(&domain, &data, &nt, &center, d, setup.p, setup.q, setup.m))
        .collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = records.iter().filter_map(|r| r.ratio).collect();
    let spread = (ratios.len() >= 2).then(|| {
        let max = ratios.iter().copied().fold(f64::MIN, f64::max);
        let min = ratios.iter().copied().fold(f64::MAX, f64::min);
        max / min
    });
    let stable = ratios.len() == records.len() && spread.is_some_and(|s| s <= SPREAD_FACTOR);
    Ok(LocalizationOutcome { records, spread, stable })
}

impl ScanSetup {
    /// `A = diag(1, 2)` on the unit square, `h ∈ {1/16, 1/32, 1/64}`,
    /// `p ∈ {2, 4, 8, 16}`.
    pub fn square_real() -> Self {
        Self {
            domain: DomainPreset::Square { side: 1.0 },
            levels: refinement_levels(1.0 / 16.0, 3),
            matrix: MatrixPreset::RealSpd {
                eigenvalues: vec![1.0, 2.0],
            },
            drift: DriftSpec::zero(),
            ps: vec![2.0, 4.0, 8.0, 16.0],
            a: 1.0,
            seed: 11,
        }
    }

    /// `A = (1+i)I` on the unit cube, `h ∈ {1/8, 1/16, 1/32}`,
    /// `p ∈ {2, 4, 8, 24, 48}`.
    pub fn cube_complex() -> Self {
        Self {
            domain: DomainPreset::Cube { side: 1.0 },
            levels: refinement_levels(1.0 / 8.0, 3),
            matrix: MatrixPreset::ScalarComplex { tau: 1.0 },
            drift: DriftSpec::zero(),
            ps: vec![2.0, 4.0, 8.0, 24.0, 48.0],
            a: 1.0,
            seed: 11,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_placement_reproduces_standard_square_balls() {
        let s = RhSetup::for_domain(
            &DomainPreset::Square { side: 1.0 },
            refinement_levels(1.0 / 32.0, 3),
            vec![MatrixPreset::Identity],
            vec![DriftSpec::zero()],
            4.0,
            vec![2.0],
            7,
        )
        .unwrap();
        assert_eq!(s.interior_center, vec![0.5, 0.5]);
        assert!((s.interior_radius - 1.0 / 16.0).abs() < 1e-15);
        assert!((s.boundary_radius - 1.0 / 8.0).abs() < 1e-15);
        let far = match &s.boundary_data {
            DataFamily::Atom { center, radius } => (center.clone(), *radius),
            _ => unreachable!(),
        };
        assert!((far.1 - 0.5).abs() < 1e-15);
        assert!((dist(&point_of(&far.0), &point_of(&s.boundary_center)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn levels_halve() {
        assert_eq!(refinement_levels(0.25, 3), vec![0.25, 0.125, 0.0625]);
    }
}
