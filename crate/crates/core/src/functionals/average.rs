//! Local `L^p` averages over interior balls `B_{δ(x)/2}(x)`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{DiscreteDomain, Point};

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::Config(format!("exponent {p} must be positive and finite")));
    }
    Ok(())
}

pub(crate) fn check_len(domain: &DiscreteDomain, values: &[Complex64]) -> Result<()> {
    if values.len() != domain.cells().len() {
        return Err(Error::Config(format!(
            "field has {} cell values, domain has {} cells",
            values.len(),
            domain.cells().len()
        )));
    }
    Ok(())
}

/// `(mean_{cells z ∈ B(x, r)} |u(z)|^p)^{1/p}`.
pub fn ball_average(domain: &DiscreteDomain, values: &[Complex64], x: &Point, r: f64, p: f64) -> Result<f64> {
    check_exponent(p)?;
    check_len(domain, values)?;
    let mut sum = 0.0;
    let mut count = 0usize;
    domain.for_each_cell_in_ball(x, r, |c| {
        sum += values[c].norm().powf(p);
        count += 1;
    });
    if count == 0 {
        return Err(Error::Degenerate(format!("ball of radius {r} at {x:?} contains no cell center")));
    }
    Ok((sum / count as f64).powf(1.0 / p))
}

/// `w(x) = (mean_{B_{δ(x)/2}(x)} |u|^p)^{1/p}` at cell `x`.
pub fn local_average(domain: &DiscreteDomain, values: &[Complex64], cell: usize, p: f64) -> Result<f64> {
    let c = domain
        .cells()
        .get(cell)
        .ok_or_else(|| Error::Domain(format!("cell {cell} does not exist")))?;
    ball_average(domain, values, &c.center, 0.5 * c.delta, p)
}

/// Per-row prefix sums of `|u|^p` and cell counts over the cell lattice.
struct RowPrefix<'a> {
    domain: &'a DiscreteDomain,
    counts: [usize; 3],
    sum: Vec<f64>,
    cnt: Vec<u32>,
}

impl<'a> RowPrefix<'a> {
    fn new(domain: &'a DiscreteDomain, values: &[Complex64], p: f64) -> Self {
        let counts = domain.counts();
        let rows = counts[1] * counts[2];
        let stride = counts[0] + 1;
        let mut sum = vec![0.0; rows * stride];
        let mut cnt = vec![0u32; rows * stride];
        for row in 0..rows {
            let (k1, k2) = (row % counts[1], row / counts[1]);
            for i in 0..counts[0] {
                let (s, c) = match domain.cell_at([i as isize, k1 as isize, k2 as isize]) {
                    Some(cell) => (values[cell].norm().powf(p), 1),
                    None => (0.0, 0),
                };
                sum[row * stride + i + 1] = sum[row * stride + i] + s;
                cnt[row * stride + i + 1] = cnt[row * stride + i] + c;
            }
        }
        Self { domain, counts, sum, cnt }
    }

    /// Sum and count over cells with `|x_c − x| < r`.
    fn query(&self, x: &Point, r: f64) -> (f64, u32) {
        let d = self.domain;
        let (h, o, dim) = (d.h(), d.origin(), d.dim());
        let center = |k: usize, i: isize| o[k] + (i as f64 + 0.5) * h;
        let range = |k: usize| -> (isize, isize) {
            if k >= dim {
                return (0, 0);
            }
            let lo = (((x[k] - r - o[k]) / h - 0.5).floor() as isize).max(0);
            let hi = (((x[k] + r - o[k]) / h - 0.5).ceil() as isize).min(self.counts[k] as isize - 1);
            (lo, hi)
        };
        let (lo1, hi1) = range(1);
        let (lo2, hi2) = range(2);
        let nx = self.counts[0] as isize;
        let stride = self.counts[0] + 1;
        let mut s = 0.0;
        let mut c = 0u32;
        for k2 in lo2..=hi2 {
            for k1 in lo1..=hi1 {
                let c1 = center(1, k1);
                let c2 = if dim == 3 { center(2, k2) } else { 0.0 };
                let inside = |i: isize| crate::geometry::point::dist(&[center(0, i), c1, c2], x) < r;
                let rest = (c1 - x[1]).powi(2) + (c2 - x[2]).powi(2);
                if rest >= r * r {
                    continue;
                }
                let w = (r * r - rest).sqrt();
                let mut lo = (((x[0] - w - o[0]) / h - 0.5).ceil() as isize).clamp(0, nx - 1);
                let mut hi = (((x[0] + w - o[0]) / h - 0.5).floor() as isize).clamp(0, nx - 1);
                while lo > 0 && inside(lo - 1) {
                    lo -= 1;
                }
                while lo <= hi && !inside(lo) {
                    lo += 1;
                }
                while hi < nx - 1 && inside(hi + 1) {
                    hi += 1;
                }
                while hi >= lo && !inside(hi) {
                    hi -= 1;
                }
                if lo > hi {
                    continue;
                }
                let row = (k1 as usize + self.counts[1] * k2 as usize) * stride;
                s += self.sum[row + hi as usize + 1] - self.sum[row + lo as usize];
                c += self.cnt[row + hi as usize + 1] - self.cnt[row + lo as usize];
            }
        }
        (s, c)
    }
}

/// [`local_average`] at every cell.
pub fn local_averages(domain: &DiscreteDomain, values: &[Complex64], p: f64) -> Result<Vec<f64>> {
    check_exponent(p)?;
    check_len(domain, values)?;
    let prefix = RowPrefix::new(domain, values, p);
    Ok(domain
        .cells()
        .par_iter()
        .map(|c| {
            let (sum, count) = prefix.query(&c.center, 0.5 * c.delta);
            (sum.max(0.0) / count.max(1) as f64).powf(1.0 / p)
        })
        .collect())
}
