//! Averaged nontangential maximal functions `Ñ_{p,a}` at face centroids.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::average::{check_exponent, check_len, local_averages};
use crate::error::{Error, Result};
use crate::geometry::{modified_cone, point::dist, DiscreteDomain};

/// Restriction of the approach region by depth `δ(y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "d", rename_all = "snake_case")]
pub enum DepthFilter {
    All,
    /// `δ(y) ≤ d`.
    AtMost(f64),
    /// `δ(y) > d`.
    Above(f64),
}

impl DepthFilter {
    fn admits(self, delta: f64) -> bool {
        match self {
            DepthFilter::All => true,
            DepthFilter::AtMost(d) => delta <= d,
            DepthFilter::Above(d) => delta > d,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NTReport {
    /// `Ñ(Q)` per face; `None` when the approach region is empty.
    pub values: Vec<Option<f64>>,
    pub p: f64,
    pub a: f64,
    pub filter: DepthFilter,
    pub missing: usize,
}

impl NTReport {
    fn new(values: Vec<Option<f64>>, p: f64, a: f64, filter: DepthFilter) -> Self {
        let missing = values.iter().filter(|v| v.is_none()).count();
        Self { values, p, a, filter, missing }
    }

    /// `L^r(∂Ω)` norm over faces with a value.
    pub fn lp_norm(&self, domain: &DiscreteDomain, r: f64) -> Result<f64> {
        check_exponent(r)?;
        let s: f64 = self
            .values
            .iter()
            .zip(domain.faces())
            .filter_map(|(v, f)| v.map(|v| f.weight * v.powf(r)))
            .sum();
        Ok(s.powf(1.0 / r))
    }

    /// Writes `face, value` rows; missing values are empty.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["face", "value"])?;
        for (i, v) in self.values.iter().enumerate() {
            w.write_record(&[i.to_string(), v.map(|x| x.to_string()).unwrap_or_default()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_metadata(&self, path: &Path) -> Result<()> {
        let meta = serde_json::json!({
            "p": self.p,
            "a": self.a,
            "filter": self.filter,
            "missing": self.missing,
            "faces": self.values.len(),
        });
        let mut f = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(&mut f, &meta)?;
        writeln!(f)?;
        Ok(())
    }
}

fn check_aperture(a: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Domain(format!("aperture {a} must be positive")));
    }
    Ok(())
}

/// Sup of each cell field over `Γ_a(Q) ∩ filter` for every face `Q`.
///
/// For a base face `Q₀`, the cells of `γ_a(Q₀)` sorted by decreasing depth
/// contribute to `Γ_a(Q)` exactly the prefix with `aδ(y) > |Q − Q₀|`.
/// Taking `Q₀ = Q` covers the `γ_a(Q)` part.
pub fn nt_sweep(domain: &DiscreteDomain, fields: &[&[f64]], a: f64, filter: DepthFilter) -> Result<Vec<Vec<Option<f64>>>> {
    check_aperture(a)?;
    let cells = domain.cells();
    for f in fields {
        if f.len() != cells.len() {
            return Err(Error::Config("field length differs from cell count".into()));
        }
    }
    let faces = domain.faces();
    let nf = faces.len();
    let nfields = fields.len();
    let admitted: Vec<usize> = (0..cells.len()).filter(|&c| filter.admits(cells[c].delta)).collect();
    let acc = (0..nf)
        .into_par_iter()
        .fold(
            || vec![f64::NEG_INFINITY; nfields * nf],
            |mut acc, q0| {
                let base = faces[q0].centroid;
                let mut cone: Vec<usize> = admitted
                    .iter()
                    .copied()
                    .filter(|&c| dist(&cells[c].center, &base) < (1.0 + a) * cells[c].delta)
                    .collect();
                if cone.is_empty() {
                    return acc;
                }
                cone.sort_by(|&x, &y| cells[y].delta.total_cmp(&cells[x].delta).then(x.cmp(&y)));
                let depth: Vec<f64> = cone.iter().map(|&c| a * cells[c].delta).collect();
                let prefmax: Vec<Vec<f64>> = fields
                    .iter()
                    .map(|f| {
                        let mut m = f64::NEG_INFINITY;
                        cone.iter()
                            .map(|&c| {
                                m = m.max(f[c]);
                                m
                            })
                            .collect()
                    })
                    .collect();
                for q in 0..nf {
                    let t = dist(&faces[q].centroid, &base);
                    let count = depth.partition_point(|&s| s > t);
                    if count == 0 {
                        continue;
                    }
                    for (k, pm) in prefmax.iter().enumerate() {
                        let slot = &mut acc[k * nf + q];
                        *slot = slot.max(pm[count - 1]);
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![f64::NEG_INFINITY; nfields * nf],
            |mut x, y| {
                x.iter_mut().zip(y).for_each(|(a, b)| *a = a.max(b));
                x
            },
        );
    Ok((0..nfields)
        .map(|k| {
            acc[k * nf..(k + 1) * nf]
                .iter()
                .map(|&v| if v == f64::NEG_INFINITY { None } else { Some(v) })
                .collect()
        })
        .collect())
}

/// `Ñ_{p,a}(u)` at every face.
pub fn ntmax(domain: &DiscreteDomain, values: &[Complex64], p: f64, a: f64) -> Result<NTReport> {
    ntmax_filtered(domain, values, p, a, DepthFilter::All)
}

pub fn ntmax_filtered(domain: &DiscreteDomain, values: &[Complex64], p: f64, a: f64, filter: DepthFilter) -> Result<NTReport> {
    let w = local_averages(domain, values, p)?;
    let mut out = nt_sweep(domain, &[&w], a, filter)?;
    Ok(NTReport::new(out.pop().expect("one field"), p, a, filter))
}

/// [`ntmax`] for several fields on the same domain.
pub fn ntmax_batch(domain: &DiscreteDomain, fields: &[&[Complex64]], p: f64, a: f64) -> Result<Vec<NTReport>> {
    let ws = fields
        .iter()
        .map(|u| local_averages(domain, u, p))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&[f64]> = ws.iter().map(Vec::as_slice).collect();
    Ok(nt_sweep(domain, &refs, a, DepthFilter::All)?
        .into_iter()
        .map(|v| NTReport::new(v, p, a, DepthFilter::All))
        .collect())
}

/// `(M₁, M₂)`: the sup over cone cells with `δ ≤ d` and with `δ > d`.
pub fn ntmax_split(domain: &DiscreteDomain, values: &[Complex64], p: f64, a: f64, d: f64) -> Result<(NTReport, NTReport)> {
    if !(d > 0.0) {
        return Err(Error::Domain(format!("split height {d} must be positive")));
    }
    let w = local_averages(domain, values, p)?;
    let m1 = nt_sweep(domain, &[&w], a, DepthFilter::AtMost(d))?.pop().expect("one field");
    let m2 = nt_sweep(domain, &[&w], a, DepthFilter::Above(d))?.pop().expect("one field");
    Ok((
        NTReport::new(m1, p, a, DepthFilter::AtMost(d)),
        NTReport::new(m2, p, a, DepthFilter::Above(d)),
    ))
}

/// `Ñ_{p,a}(u)(Q)` at one face by direct construction of `Γ_a(Q)`.
pub fn ntmax_at_face(domain: &DiscreteDomain, values: &[Complex64], p: f64, a: f64, face: usize) -> Result<Option<f64>> {
    check_len(domain, values)?;
    let q = domain
        .faces()
        .get(face)
        .ok_or_else(|| Error::Domain(format!("face {face} does not exist")))?
        .centroid;
    let cone = modified_cone(domain, &q, a)?;
    let w = local_averages(domain, values, p)?;
    Ok(cone.cells.iter().map(|&c| w[c]).reduce(f64::max))
}

/// `(Σ_f σ_f |g_f|^p)^{1/p}`.
pub fn boundary_lp_norm(domain: &DiscreteDomain, g: &[f64], p: f64) -> Result<f64> {
    check_exponent(p)?;
    if g.len() != domain.faces().len() {
        return Err(Error::Config(format!(
            "{} face values for {} faces",
            g.len(),
            domain.faces().len()
        )));
    }
    let s: f64 = g
        .iter()
        .zip(domain.faces())
        .map(|(v, f)| f.weight * v.abs().powf(p))
        .sum();
    Ok(s.powf(1.0 / p))
}
