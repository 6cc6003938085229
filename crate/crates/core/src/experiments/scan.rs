//! Estimated solvability constants `Ĉ(p) = max_f ‖Ñ_{2,a}(u_f)‖_p / ‖f‖_p`
//! across refinements.

use serde::Serialize;

use crate::ellipticity::{p_ellipticity_range, Exponent, MatrixField, MatrixPreset};
use crate::error::{Error, Result};
use crate::functionals::{boundary_lp_norm, ntmax_batch};
use crate::geometry::{DiscreteDomain, DomainPreset};
use crate::solver::{assemble, standard_family, BoundaryData, DriftField, DriftSpec};

/// Largest growth of `Ĉ(p)` per refinement still called stable.
pub const STABILITY_GROWTH: f64 = 1.5;
/// Lower end of the predicted range.
pub const RANGE_LOWER: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanSetup {
    pub domain: DomainPreset,
    /// Mesh sizes, coarse to fine.
    pub levels: Vec<f64>,
    pub matrix: MatrixPreset,
    pub drift: DriftSpec,
    pub ps: Vec<f64>,
    pub a: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRecord {
    pub operator: String,
    pub domain: String,
    pub p: f64,
    /// Member attaining the maximum.
    pub family: String,
    /// Estimated constant; a lower bound for the true one.
    pub estimate: f64,
    /// Ratio for the constant datum, 1 up to rounding.
    pub constant_ratio: f64,
    pub level: usize,
    pub h: f64,
    pub predicted_endpoint: Exponent,
    pub inside_range: bool,
    pub missing: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Stable,
    Unstable,
    /// A level was refused or failed, so no verdict is possible.
    Gap,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanVerdict {
    pub operator: String,
    pub p: f64,
    pub verdict: Verdict,
    /// `Ĉ` ratio between consecutive levels.
    pub growth: Vec<f64>,
    pub inside_range: bool,
    /// Whether the verdict agrees with the prediction; absent outside the
    /// predicted range, where nothing is claimed.
    pub consistent: Option<bool>,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanGap {
    pub level: usize,
    pub h: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanOutcome {
    pub records: Vec<ScanRecord>,
    pub verdicts: Vec<ScanVerdict>,
    pub gaps: Vec<ScanGap>,
}

fn scan_level(setup: &ScanSetup, level: usize, h: f64, endpoint: Exponent) -> Result<Vec<ScanRecord>> {
    let domain = DiscreteDomain::build(&setup.domain, h)?;
    let field = MatrixField::from_preset(&setup.matrix, domain.dim())?;
    let drift = DriftField::build(&domain, &setup.drift)?;
    let system = assemble(&field, &drift, &domain)?;
    let family = standard_family(&domain, setup.seed);
    let mut data = Vec::with_capacity(family.len());
    let mut solutions = Vec::with_capacity(family.len());
    for member in &family {
        let f = BoundaryData::new(&domain, member)?;
        solutions.push(system.solve_dirichlet(&domain, &f)?.cell_values);
        data.push(f);
    }
    let refs: Vec<&[_]> = solutions.iter().map(Vec::as_slice).collect();
    let nts = ntmax_batch(&domain, &refs, 2.0, setup.a)?;
    let mut out = Vec::with_capacity(setup.ps.len());
    for &p in &setup.ps {
        let mut best = (f64::NEG_INFINITY, String::new());
        let mut constant_ratio = f64::NAN;
        let mut missing = 0;
        for ((member, f), nt) in family.iter().zip(&data).zip(&nts) {
            let g: Vec<f64> = f.face_values().iter().map(|z| z.norm()).collect();
            let fnorm = boundary_lp_norm(&domain, &g, p)?;
            if fnorm == 0.0 {
                continue;
            }
            let ratio = nt.lp_norm(&domain, p)? / fnorm;
            missing = missing.max(nt.missing);
            if member.is_constant() {
                constant_ratio = ratio;
                if (ratio - 1.0).abs() > 1e-9 {
                    return Err(Error::Invariant(format!(
                        "constant datum gives ‖Ñ‖_p/‖f‖_p = {ratio} at p = {p}, h = {h}"
                    )));
                }
            }
            if ratio > best.0 {
                best = (ratio, member.label());
            }
        }
        out.push(ScanRecord {
            operator: field.label().to_string(),
            domain: setup.domain.name().to_string(),
            p,
            family: best.1,
            estimate: best.0,
            constant_ratio,
            level,
            h,
            predicted_endpoint: endpoint,
            inside_range: p >= RANGE_LOWER && endpoint.exceeds(p),
            missing,
        });
    }
    Ok(out)
}

/// Runs the scan level by level; refusals and numerical failures become
/// gaps, configuration errors and invariant violations propagate.
pub fn solvability_scan(setup: &ScanSetup) -> Result<ScanOutcome> {
    if setup.levels.is_empty() || setup.ps.is_empty() {
        return Err(Error::Config("scan needs at least one level and one exponent".into()));
    }
    let dim = setup.domain.dim();
    let field = MatrixField::from_preset(&setup.matrix, dim)?;
    let endpoint = p_ellipticity_range(&field, dim)?.endpoint;
    let mut records = Vec::new();
    let mut gaps = Vec::new();
    for (level, &h) in setup.levels.iter().enumerate() {
        match scan_level(setup, level, h, endpoint) {
            Ok(r) => records.extend(r),
            Err(e @ (Error::Refused(_) | Error::Computation { .. })) => gaps.push(ScanGap {
                level,
                h,
                reason: e.to_string(),
            }),
            Err(e) => return Err(e),
        }
    }
    let verdicts = setup
        .ps
        .iter()
        .map(|&p| {
            let series: Vec<&ScanRecord> = records.iter().filter(|r| r.p == p).collect();
            let inside_range = p >= RANGE_LOWER && endpoint.exceeds(p);
            let growth: Vec<f64> = series.windows(2).map(|w| w[1].estimate / w[0].estimate).collect();
            let verdict = if !gaps.is_empty() || series.len() != setup.levels.len() {
                Verdict::Gap
            } else if growth.iter().all(|&g| g <= STABILITY_GROWTH) {
                Verdict::Stable
            } else {
                Verdict::Unstable
            };
            ScanVerdict {
                operator: field.label().to_string(),
                p,
                verdict,
                growth,
                inside_range,
                consistent: inside_range.then_some(verdict == Verdict::Stable),
                threshold: STABILITY_GROWTH,
            }
        })
        .collect();
    Ok(ScanOutcome { records, verdicts, gaps })
}
