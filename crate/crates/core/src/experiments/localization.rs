//! Localization estimate for `Ñ_{2,a}` with data vanishing near a surface ball.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::NTReport;
use crate::functionals::truncated_cone_cells;
use crate::geometry::{point::dist, DiscreteDomain, Point};
use crate::solver::BoundaryData;

pub const DEFAULT_M: usize = 2;
pub const ESCALATED_M: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalizationRecord {
    pub center: Vec<f64>,
    pub d: f64,
    /// Enlargement factor actually used.
    pub m: usize,
    pub escalated: bool,
    pub p: f64,
    pub q: f64,
    pub a: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: Option<f64>,
    pub missing: usize,
    pub h: f64,
    pub degenerate: bool,
}

/// Whether `Γ_a^{2d}(P) ⊆ T(mΔ)` for every face `P` of `Δ = Δ(q, d)`.
pub fn cone_containment(domain: &DiscreteDomain, q: &Point, d: f64, a: f64, m: usize) -> bool {
    let reach = m as f64 * d;
    domain.faces_in_ball(q, d).into_iter().all(|f| {
        let p = domain.faces()[f].centroid;
        truncated_cone_cells(domain, &p, a, d)
            .iter()
            .all(|&c| dist(&domain.cells()[c].center, q) < reach)
    })
}

/// Smallest of `{m, 4}` for which the containment holds.
pub fn resolve_m(domain: &DiscreteDomain, q: &Point, d: f64, a: f64, m: usize) -> Result<(usize, bool)> {
    if cone_containment(domain, q, d, a, m) {
        return Ok((m, false));
    }
    if m < ESCALATED_M && cone_containment(domain, q, d, a, ESCALATED_M) {
        return Ok((ESCALATED_M, true));
    }
    Err(Error::Skipped(format!(
        "truncated cones over Δ({q:?}, {d}) leave T({}Δ)",
        m.max(ESCALATED_M)
    )))
}

fn face_mean(domain: &DiscreteDomain, nt: &NTReport, faces: &[usize], r: f64) -> (f64, usize) {
    let mut total = 0.0;
    let mut s = 0.0;
    let mut missing = 0;
    for &f in faces {
        let w = domain.faces()[f].weight;
        match nt.values[f] {
            Some(v) => {
                s += w * v.powf(r);
                total += w;
            }
            None => missing += 1,
        }
    }
    if total == 0.0 {
        return (0.0, missing);
    }
    ((s / total).powf(1.0 / r), missing)
}

/// Checks the hypotheses and evaluates both sides of
/// `(⨍_Δ Ñ^p)^{1/p} ≤ C (⨍_{8mΔ} Ñ^q)^{1/q}`.
///
/// `nt` must be `Ñ_{2,a}` of the solution with data `data`.
#[allow(clippy::too_many_arguments)]
pub fn localization_check(
    domain: &DiscreteDomain,
    data: &BoundaryData,
    nt: &NTReport,
    q_center: &Point,
    d: f64,
    p: f64,
    q: f64,
    m: usize,
) -> Result<LocalizationRecord> {
    if !(q >= 1.0) || q > p {
        return Err(Error::Config(format!("need 1 ≤ q ≤ p, got q = {q}, p = {p}")));
    }
    if domain.boundary_distance(q_center) > 1e-9 * domain.diameter() {
        return Err(Error::Domain(format!("{q_center:?} is not on the boundary")));
    }
    let a = nt.a;
    let (m, escalated) = resolve_m(domain, q_center, d, a, m)?;
    let radius = 16.0 * m as f64 * d;
    let vanishing = domain.faces_in_ball(q_center, radius);
    if vanishing.len() == domain.faces().len() {
        return Err(Error::Skipped(format!("16mΔ of radius {radius} covers the whole boundary")));
    }
    if let Some(f) = vanishing.iter().find(|&&f| data.face_values()[f].norm() != 0.0) {
        return Err(Error::Domain(format!("boundary data does not vanish on face {f} of 16mΔ")));
    }
    let small = domain.faces_in_ball(q_center, d);
    let large = domain.faces_in_ball(q_center, 8.0 * m as f64 * d);
    if small.is_empty() {
        return Err(Error::Degenerate(format!("Δ of radius {d} contains no face")));
    }
    let (lhs, miss_s) = face_mean(domain, nt, &small, p);
    let (rhs, miss_l) = face_mean(domain, nt, &large, q);
    Ok(LocalizationRecord {
        center: q_center[..domain.dim()].to_vec(),
        d,
        m,
        escalated,
        p,
        q,
        a,
        lhs,
        rhs,
        ratio: (rhs > 0.0).then(|| lhs / rhs),
        missing: miss_s + miss_l,
        h: domain.h(),
        degenerate: lhs == 0.0 && rhs == 0.0,
    })
}
