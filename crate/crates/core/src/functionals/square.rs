//! Truncated square function `A_ã(∇v)` and the power transform `|u|^{s/2−1}u`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{point::dist, DiscreteDomain, Point};
use crate::solver::SolutionField;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SquareFunctionReport {
    /// `A_ã(∇v)(P)` per requested face; `None` for an empty truncated cone.
    pub values: Vec<Option<f64>>,
    pub faces: Vec<usize>,
    pub aperture: f64,
    pub d: f64,
    pub missing: usize,
}

/// Cells of `Γ_a(P) ∩ B(P, 2d)`.
pub fn truncated_cone_cells(domain: &DiscreteDomain, p: &Point, a: f64, d: f64) -> Vec<usize> {
    let cells = domain.cells();
    // Base faces of a member y satisfy |Q₀ − P| < aδ(y) < 2ad.
    let bases: Vec<Point> = domain
        .faces_in_ball(p, 2.0 * a * d)
        .into_iter()
        .map(|f| domain.faces()[f].centroid)
        .collect();
    let mut out = Vec::new();
    domain.for_each_cell_in_ball(p, 2.0 * d, |c| {
        let (y, dy) = (&cells[c].center, cells[c].delta);
        let reach = (1.0 + a) * dy;
        if dist(y, p) < reach || bases.iter().any(|q0| dist(q0, p) < a * dy && dist(q0, y) < reach) {
            out.push(c);
        }
    });
    out.sort_unstable();
    out
}

fn check(a: f64, d: f64) -> Result<()> {
    if !(a > 0.0) || !(d > 0.0) {
        return Err(Error::Domain(format!("aperture {a} and height {d} must be positive")));
    }
    Ok(())
}

/// `(d⁻¹ Σ_{z ∈ Γ_ã^{2d}(P)} |∇v(z)|² δ(z)^{1−n} vol)^{1/2}` at face `face`.
pub fn square_function(
    domain: &DiscreteDomain,
    gradient: &[[Complex64; 3]],
    face: usize,
    a: f64,
    d: f64,
) -> Result<Option<f64>> {
    check(a, d)?;
    if gradient.len() != domain.cells().len() {
        return Err(Error::Config("gradient length differs from cell count".into()));
    }
    let p = domain
        .faces()
        .get(face)
        .ok_or_else(|| Error::Domain(format!("face {face} does not exist")))?
        .centroid;
    let cells = truncated_cone_cells(domain, &p, a, d);
    if cells.is_empty() {
        return Ok(None);
    }
    let n = domain.dim() as i32;
    let vol = domain.cell_volume();
    let s: f64 = cells
        .iter()
        .map(|&c| {
            let g: f64 = gradient[c].iter().map(|z| z.norm_sqr()).sum();
            g * domain.cells()[c].delta.powi(1 - n) * vol
        })
        .sum();
    Ok(Some((s / d).sqrt()))
}

/// [`square_function`] at each of `faces`.
pub fn square_function_report(
    domain: &DiscreteDomain,
    gradient: &[[Complex64; 3]],
    faces: &[usize],
    a: f64,
    d: f64,
) -> Result<SquareFunctionReport> {
    let values = faces
        .par_iter()
        .map(|&f| square_function(domain, gradient, f, a, d))
        .collect::<Result<Vec<_>>>()?;
    let missing = values.iter().filter(|v| v.is_none()).count();
    Ok(SquareFunctionReport {
        values,
        faces: faces.to_vec(),
        aperture: a,
        d,
        missing,
    })
}

fn power_value(u: Complex64, gamma: f64) -> Complex64 {
    let m = u.norm();
    if m == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        u * m.powf(gamma)
    }
}

/// `v = |u|^{s/2−1} u` with gradient
/// `|u|^γ ∇u + γ |u|^{γ−2} u Re(ū ∇u)`, `γ = s/2 − 1`, per cell. Where
/// `u = 0` the value is 0 and the gradient is `∇u` for `s = 2`, else 0.
pub fn power_transform(u: &SolutionField, s: f64) -> Result<SolutionField> {
    if !(s > 1.0) || !s.is_finite() {
        return Err(Error::Config(format!("power exponent {s} must exceed 1")));
    }
    let gamma = 0.5 * s - 1.0;
    if gamma == 0.0 {
        return Ok(u.clone());
    }
    let nodal = u.nodal.iter().map(|&z| power_value(z, gamma)).collect();
    let cell_values = u.cell_values.iter().map(|&z| power_value(z, gamma)).collect();
    let gradient = u
        .cell_values
        .iter()
        .zip(&u.gradient)
        .map(|(&z, g)| {
            let m = z.norm();
            if m == 0.0 {
                return [Complex64::new(0.0, 0.0); 3];
            }
            let scale = m.powf(gamma);
            let radial = gamma * m.powf(gamma - 2.0);
            g.map(|gk| gk * scale + z * (radial * (z.conj() * gk).re))
        })
        .collect();
    Ok(SolutionField {
        nodal,
        gradient,
        cell_values,
        residual: u.residual,
        stats: u.stats.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{truncated_cone, DomainPreset};
    use crate::linalg::SolveStats;

    #[test]
    fn truncated_cells_match_region() {
        let d = DiscreteDomain::build(&DomainPreset::LShape, 1.0 / 16.0).unwrap();
        for f in (0..d.faces().len()).step_by(5) {
            let p = d.faces()[f].centroid;
            for (a, h) in [(1.0, 0.1), (0.5, 0.2), (2.0, 0.05)] {
                assert_eq!(truncated_cone_cells(&d, &p, a, h), truncated_cone(&d, &p, a, h).unwrap().cells);
            }
        }
    }

    #[test]
    fn unit_gradient_matches_direct_sum() {
        let d = DiscreteDomain::build(&DomainPreset::Square { side: 1.0 }, 1.0 / 32.0).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let grad = vec![[one, zero, zero]; d.cells().len()];
        let face = d.faces().len() / 8;
        let p = d.faces()[face].centroid;
        let cells = truncated_cone(&d, &p, 1.0, 0.125).unwrap().cells;
        let direct: f64 = cells.iter().map(|&c| d.cell_volume() / d.cells()[c].delta).sum::<f64>() / 0.125;
        let v = square_function(&d, &grad, face, 1.0, 0.125).unwrap().unwrap();
        assert!((v - direct.sqrt()).abs() < 1e-12);
        let twice: Vec<_> = grad.iter().map(|g| g.map(|z| z * 2.0)).collect();
        let w = square_function(&d, &twice, face, 1.0, 0.125).unwrap().unwrap();
        assert!((w - 2.0 * v).abs() < 1e-12);
    }

    #[test]
    fn power_transform_identities() {
        let z = Complex64::new(0.6, -0.8);
        let u = SolutionField {
            nodal: vec![z, Complex64::new(0.0, 0.0)],
            gradient: vec![[Complex64::new(1.0, 2.0); 3]],
            cell_values: vec![z],
            residual: 0.0,
            stats: SolveStats { method: "none".into(), iterations: 0, relative_residual: 0.0 },
        };
        assert_eq!(power_transform(&u, 2.0).unwrap(), u);
        let v = power_transform(&u, 3.0).unwrap();
        for (a, b) in u.nodal.iter().zip(&v.nodal) {
            assert!((b.norm_sqr() - a.norm().powf(3.0)).abs() < 1e-15);
        }
        assert!(power_transform(&u, 1.0).is_err());
    }
}
