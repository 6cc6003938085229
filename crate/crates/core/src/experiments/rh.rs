//! Interior and boundary reverse Hölder measurements.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{point::dist, DiscreteDomain, Point};
use crate::solver::{BoundaryData, SolutionField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RhKind {
    /// `(⨍_{B_r}|u|^q)^{1/q}` against `(⨍_{B_2r}|u|^p)^{1/p}`.
    Interior,
    /// `r² ⨍_{B_r}|∇u|²|u|^{q−2}` against `⨍_{B_2r}|u|^q`.
    InteriorGradient,
    /// `∫_{B∩Ω}|u|^{q−2}|∇u|²` against `r⁻² ∫_{(2B∖B)∩Ω}|u|^q`.
    BoundaryCaccioppoli,
    /// `(⨍_{B∩Ω}|u|^q)^{1/q}` against `(⨍_{2B∩Ω}|u|^p)^{1/p}`.
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RHRecord {
    /// Operator label, filled in by the campaign.
    pub operator: String,
    pub drift_k: f64,
    pub kind: RhKind,
    pub ball: String,
    pub radius: f64,
    pub q: f64,
    pub p: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`, absent when `rhs = 0`.
    pub ratio: Option<f64>,
    pub level: usize,
    pub h: f64,
    pub degenerate: bool,
}

impl RHRecord {
    #[allow(clippy::too_many_arguments)]
    fn new(kind: RhKind, ball: String, radius: f64, q: f64, p: f64, lhs: f64, rhs: f64, level: usize, h: f64) -> Self {
        let degenerate = lhs == 0.0 && rhs == 0.0;
        Self {
            operator: String::new(),
            drift_k: 0.0,
            kind,
            ball,
            radius,
            q,
            p,
            lhs,
            rhs,
            ratio: (rhs > 0.0).then(|| lhs / rhs),
            level,
            h,
            degenerate,
        }
    }
}

impl RHRecord {
    pub fn tagged(mut self, operator: &str, drift_k: f64) -> Self {
        self.operator = operator.to_string();
        self.drift_k = drift_k;
        self
    }
}

fn ball_label(x: &Point, r: f64) -> String {
    format!("({:.6},{:.6},{:.6};{r:.6})", x[0], x[1], x[2])
}

fn mean_power(u: &SolutionField, cells: &[usize], p: f64) -> Result<f64> {
    if cells.is_empty() {
        return Err(Error::Degenerate("ball contains no cell center".into()));
    }
    let s: f64 = cells.iter().map(|&c| u.cell_values[c].norm().powf(p)).sum();
    Ok((s / cells.len() as f64).powf(1.0 / p))
}

fn weighted_gradient(u: &SolutionField, cells: &[usize], q: f64) -> f64 {
    cells
        .iter()
        .map(|&c| {
            let m = u.cell_values[c].norm();
            if m == 0.0 {
                return 0.0;
            }
            let g: f64 = u.gradient[c].iter().map(|z| z.norm_sqr()).sum();
            g * m.powf(q - 2.0)
        })
        .sum()
}

fn check_exponents(q: f64, p: f64) -> Result<()> {
    if !(q > 0.0) || !(p > 0.0) || !q.is_finite() || !p.is_finite() {
        return Err(Error::Config(format!("exponents q = {q}, p = {p} must be positive")));
    }
    Ok(())
}

/// Interior reverse Hölder record, plus its gradient form.
///
/// Returns `Skipped` unless `r < δ(x)/4`.
#[allow(clippy::too_many_arguments)]
pub fn interior_rh(
    domain: &DiscreteDomain,
    u: &SolutionField,
    x: &Point,
    r: f64,
    q: f64,
    p: f64,
    level: usize,
) -> Result<[RHRecord; 2]> {
    check_exponents(q, p)?;
    let delta = domain.delta(x)?;
    if !(r > 0.0) || r >= delta / 4.0 {
        return Err(Error::Skipped(format!("radius {r} is not below δ(x)/4 = {}", delta / 4.0)));
    }
    let inner = domain.cells_in_ball(x, r);
    let outer = domain.cells_in_ball(x, 2.0 * r);
    let label = ball_label(x, r);
    let h = domain.h();
    let rh = RHRecord::new(
        RhKind::Interior,
        label.clone(),
        r,
        q,
        p,
        mean_power(u, &inner, q)?,
        mean_power(u, &outer, p)?,
        level,
        h,
    );
    let grad = r * r * weighted_gradient(u, &inner, q) / inner.len() as f64;
    let mass = mean_power(u, &outer, q)?.powf(q);
    let gr = RHRecord::new(RhKind::InteriorGradient, label, r, q, q, grad, mass, level, h);
    Ok([rh, gr])
}

/// Boundary Caccioppoli and reverse Hölder records for a ball `B(x, r)`
/// centered on `∂Ω`. The data must vanish on the faces of `2B`.
#[allow(clippy::too_many_arguments)]
pub fn boundary_rh(
    domain: &DiscreteDomain,
    u: &SolutionField,
    data: &BoundaryData,
    x: &Point,
    r: f64,
    q: f64,
    p: f64,
    level: usize,
) -> Result<[RHRecord; 2]> {
    check_exponents(q, p)?;
    if domain.boundary_distance(x) > 1e-9 * domain.diameter() {
        return Err(Error::Domain(format!("ball center {x:?} is not on the boundary")));
    }
    for f in domain.faces_in_ball(x, 2.0 * r) {
        if data.face_values()[f].norm() != 0.0 {
            return Err(Error::Domain(format!("boundary data does not vanish on face {f} of 2B")));
        }
    }
    let inner = domain.cells_in_ball(x, r);
    let outer = domain.cells_in_ball(x, 2.0 * r);
    let vol = domain.cell_volume();
    let label = ball_label(x, r);
    let h = domain.h();
    let cacc_lhs = weighted_gradient(u, &inner, q) * vol;
    let shell: f64 = outer
        .iter()
        .filter(|&&c| dist(&domain.cells()[c].center, x) >= r)
        .map(|&c| u.cell_values[c].norm().powf(q))
        .sum::<f64>()
        * vol
        / (r * r);
    let cacc = RHRecord::new(RhKind::BoundaryCaccioppoli, label.clone(), r, q, q, cacc_lhs, shell, level, h);
    let rh = RHRecord::new(
        RhKind::Boundary,
        label,
        r,
        q,
        p,
        mean_power(u, &inner, q)?,
        mean_power(u, &outer, p)?,
        level,
        h,
    );
    Ok([cacc, rh])
}

/// `max / min` of the finite ratios, or `None` when fewer than two exist.
pub fn spread(records: &[&RHRecord]) -> Option<f64> {
    let r: Vec<f64> = records.iter().filter_map(|r| r.ratio).collect();
    if r.len() < 2 {
        return None;
    }
    let max = r.iter().copied().fold(f64::MIN, f64::max);
    let min = r.iter().copied().fold(f64::MAX, f64::min);
    Some(max / min)
}
