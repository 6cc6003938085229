//! Surface balls, Carleson regions and approach regions as cell sets.

use rayon::prelude::*;
use serde::Serialize;

use super::domain::DiscreteDomain;
use super::point::{dist, Point};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceBall {
    pub center: Point,
    pub radius: f64,
    /// Faces whose centroid lies within `radius` of `center`.
    pub faces: Vec<usize>,
}

impl SurfaceBall {
    pub fn new(domain: &DiscreteDomain, center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Domain(format!("surface ball radius {radius} must be positive")));
        }
        if domain.boundary_distance(&center) > 1e-9 * domain.diameter() {
            return Err(Error::Domain(format!("ball center {center:?} is not on the boundary")));
        }
        Ok(Self {
            center,
            radius,
            faces: domain.faces_in_ball(&center, radius),
        })
    }

    /// Concentric ball with radius scaled by `k`.
    pub fn dilate(&self, domain: &DiscreteDomain, k: f64) -> Self {
        Self {
            center: self.center,
            radius: k * self.radius,
            faces: domain.faces_in_ball(&self.center, k * self.radius),
        }
    }

    /// `Σ σ_f` over member faces.
    pub fn face_measure(&self, domain: &DiscreteDomain) -> f64 {
        self.faces.iter().map(|&f| domain.faces()[f].weight).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegionKind {
    Carleson { radius: f64 },
    StandardCone { aperture: f64 },
    ModifiedCone { aperture: f64 },
    TruncatedCone { aperture: f64, d: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Region {
    pub kind: RegionKind,
    pub apex: Point,
    /// Member cells in increasing order.
    pub cells: Vec<usize>,
    /// Set when the region is too small to be meaningful at this resolution.
    pub degenerate: bool,
}

impl Region {
    pub fn contains(&self, cell: usize) -> bool {
        self.cells.binary_search(&cell).is_ok()
    }

    pub fn is_subset_of(&self, other: &Region) -> bool {
        self.cells.iter().all(|&c| other.contains(c))
    }

    pub fn volume(&self, domain: &DiscreteDomain) -> f64 {
        self.cells.len() as f64 * domain.cell_volume()
    }
}

fn check_aperture(a: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Domain(format!("aperture {a} must be positive")));
    }
    Ok(())
}

/// `γ_a(Q) = {x : |x − Q| < (1+a)δ(x)}`.
pub fn standard_cone(domain: &DiscreteDomain, q: &Point, a: f64) -> Result<Region> {
    check_aperture(a)?;
    let cells = domain
        .cells()
        .iter()
        .enumerate()
        .filter(|(_, c)| dist(&c.center, q) < (1.0 + a) * c.delta)
        .map(|(i, _)| i)
        .collect::<Vec<_>>();
    Ok(Region {
        kind: RegionKind::StandardCone { aperture: a },
        apex: *q,
        degenerate: cells.is_empty(),
        cells,
    })
}

/// Whether `y ∈ Γ_a(Q)`: some `Q₀` among the face centroids and `Q` itself
/// has `|y − Q₀| < (1+a)δ(y)` and `|Q − Q₀| < aδ(y)`.
pub fn in_modified_cone(domain: &DiscreteDomain, y: &Point, delta_y: f64, q: &Point, a: f64) -> bool {
    let reach = (1.0 + a) * delta_y;
    let slack = a * delta_y;
    if dist(y, q) < reach {
        return true;
    }
    domain
        .faces()
        .iter()
        .any(|f| dist(&f.centroid, q) < slack && dist(&f.centroid, y) < reach)
}

/// `Γ_a(Q)` by direct unfolding of its definition.
pub fn modified_cone(domain: &DiscreteDomain, q: &Point, a: f64) -> Result<Region> {
    check_aperture(a)?;
    let cells = domain
        .cells()
        .par_iter()
        .enumerate()
        .filter(|(_, c)| in_modified_cone(domain, &c.center, c.delta, q, a))
        .map(|(i, _)| i)
        .collect::<Vec<_>>();
    Ok(Region {
        kind: RegionKind::ModifiedCone { aperture: a },
        apex: *q,
        degenerate: cells.is_empty(),
        cells,
    })
}

/// `Γ_a^{2d}(Q) = Γ_a(Q) ∩ B(Q, 2d)`.
pub fn truncated_cone(domain: &DiscreteDomain, q: &Point, a: f64, d: f64) -> Result<Region> {
    if !(d > 0.0) {
        return Err(Error::Domain(format!("truncation height {d} must be positive")));
    }
    let full = modified_cone(domain, q, a)?;
    let cells: Vec<usize> = full
        .cells
        .into_iter()
        .filter(|&c| dist(&domain.cells()[c].center, q) < 2.0 * d)
        .collect();
    Ok(Region {
        kind: RegionKind::TruncatedCone { aperture: a, d },
        apex: *q,
        degenerate: cells.is_empty(),
        cells,
    })
}

/// `T(Δ) = B(Q, r) ∩ Ω`.
pub fn carleson_region(domain: &DiscreteDomain, ball: &SurfaceBall) -> Region {
    let cells = domain.cells_in_ball(&ball.center, ball.radius);
    Region {
        kind: RegionKind::Carleson { radius: ball.radius },
        apex: ball.center,
        degenerate: ball.radius < domain.h() || cells.len() <= 1,
        cells,
    }
}

/// Share of `2Δ`, by surface measure, made of faces `P` with `y ∈ Γ_a(P)`.
///
/// `ball` is `Δ` of radius `d`; `y` must satisfy `δ(y) > d` and lie in
/// `Γ_a(Q)` for some face `Q` of `Δ`.
pub fn check_prop_size(domain: &DiscreteDomain, ball: &SurfaceBall, y: usize, a: f64) -> Result<f64> {
    check_aperture(a)?;
    let cell = domain
        .cells()
        .get(y)
        .ok_or_else(|| Error::Domain(format!("cell {y} does not exist")))?;
    if cell.delta <= ball.radius {
        return Err(Error::Domain(format!(
            "δ(y) = {} must exceed the ball radius {}",
            cell.delta, ball.radius
        )));
    }
    let member = |p: &Point| in_modified_cone(domain, &cell.center, cell.delta, p, a);
    if !ball.faces.iter().any(|&f| member(&domain.faces()[f].centroid)) {
        return Err(Error::Domain(
            "y lies in no approach region based in the ball".into(),
        ));
    }
    let double = ball.dilate(domain, 2.0);
    let total = double.face_measure(domain);
    let hit: f64 = double
        .faces
        .iter()
        .filter(|&&f| member(&domain.faces()[f].centroid))
        .map(|&f| domain.faces()[f].weight)
        .sum();
    Ok(hit / total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::domain::DomainPreset;

    fn square(h: f64) -> DiscreteDomain {
        DiscreteDomain::build(&DomainPreset::Square { side: 1.0 }, h).unwrap()
    }

    #[test]
    fn cone_membership_examples() {
        let d = square(1.0 / 20.0);
        let q = [0.5, 0.0, 0.0];
        let g = standard_cone(&d, &q, 1.0).unwrap();
        let at = |x: f64, y: f64| d.locate(&[x, y, 0.0]).unwrap();
        // Centers at odd multiples of 1/40.
        assert!(g.contains(at(0.51, 0.31)));
        assert!(!g.contains(at(0.91, 0.11)));
        let m = modified_cone(&d, &q, 1.0).unwrap();
        assert!(m.contains(at(0.51, 0.41)));
        assert!(g.is_subset_of(&m));
        assert!(m.is_subset_of(&standard_cone(&d, &q, 2.0).unwrap()));
        let big = standard_cone(&d, &q, 1e6).unwrap();
        assert_eq!(big.cells.len(), d.cells().len());
    }

    #[test]
    fn carleson_half_disc() {
        let q = [0.5, 0.0, 0.0];
        let exact = std::f64::consts::PI * 0.25f64.powi(2) / 2.0;
        let mut errs = Vec::new();
        for h in [1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0] {
            let d = square(h);
            let ball = SurfaceBall::new(&d, q, 0.25).unwrap();
            let t = carleson_region(&d, &ball);
            errs.push((t.volume(&d) - exact).abs());
        }
        assert!(errs[2] < errs[0]);
        assert!(errs[2] / exact < 0.02);
        let d = square(1.0 / 16.0);
        let all = carleson_region(&d, &SurfaceBall::new(&d, q, 2.0).unwrap());
        assert_eq!(all.cells.len(), d.cells().len());
        let tiny = carleson_region(&d, &SurfaceBall::new(&d, q, 0.01).unwrap());
        assert!(tiny.degenerate);
    }

    #[test]
    fn prop_size_flat_edge() {
        let d = square(1.0 / 128.0);
        let q = [0.5 + 1.0 / 256.0, 0.0, 0.0];
        let ball = SurfaceBall::new(&d, q, 1.0 / 16.0).unwrap();
        let y = d.locate(&[q[0], 0.125 + 1e-3, 0.0]).unwrap();
        let r = check_prop_size(&d, &ball, y, 1.0).unwrap();
        assert!(r >= 0.25, "{r}");
        let low = d.locate(&[q[0], 0.01, 0.0]).unwrap();
        assert!(matches!(check_prop_size(&d, &ball, low, 1.0), Err(Error::Domain(_))));
    }
}
