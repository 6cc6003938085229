//! Banded LU factorization without pivoting.
//!
//! The systems assembled here have a positive definite Hermitian part once the
//! coercivity gate has passed, so Gaussian elimination without row exchanges
//! exists and is backward stable. Lexicographic node ordering keeps the
//! half-bandwidth at one grid row (2D) or one grid plane (3D).

use num_complex::Complex64;

use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    bw: usize,
    /// Row `i` stores columns `i − bw ..= i + bw` at offsets `0 ..= 2bw`.
    band: Vec<Complex64>,
}

impl BandLu {
    /// Number of stored entries a factorization of `a` would need.
    pub fn storage_for(a: &CsrMatrix) -> usize {
        a.n_rows() * (2 * a.half_bandwidth() + 1)
    }

    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        if a.n_rows() != a.n_cols() {
            return Err(Error::Config("band LU needs a square matrix".into()));
        }
        let n = a.n_rows();
        let bw = a.half_bandwidth();
        let w = 2 * bw + 1;
        let mut band = vec![Complex64::new(0.0, 0.0); n * w];
        for i in 0..n {
            for (j, v) in a.row(i) {
                band[i * w + (j + bw - i)] = v;
            }
        }
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let pivot = band[k * w + bw];
            if pivot.norm() <= 1e-14 * scale {
                return Err(Error::computation(
                    format!("zero pivot at row {k} in band LU"),
                    vec![pivot.norm(), scale],
                ));
            }
            let inv = pivot.inv();
            let last = (k + bw).min(n - 1);
            for i in k + 1..=last {
                let ik = i * w + (k + bw - i);
                let l = band[ik] * inv;
                if l == Complex64::new(0.0, 0.0) {
                    continue;
                }
                band[ik] = l;
                for j in k + 1..=last {
                    let u = band[k * w + (j + bw - k)];
                    band[i * w + (j + bw - i)] -= l * u;
                }
            }
        }
        Ok(Self { n, bw, band })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let (n, bw, w) = (self.n, self.bw, 2 * self.bw + 1);
        let mut x = b.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let mut acc = x[i];
            for j in lo..i {
                acc -= self.band[i * w + (j + bw - i)] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let hi = (i + bw).min(n - 1);
            let mut acc = x[i];
            for j in i + 1..=hi {
                acc -= self.band[i * w + (j + bw - i)] * x[j];
            }
            x[i] = acc / self.band[i * w + bw];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sparse::norm2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn solves_tridiagonal() {
        let n = 50;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, c(2.0, 0.5)));
            if i > 0 {
                t.push((i, i - 1, c(-1.0, 0.1)));
            }
            if i + 1 < n {
                t.push((i, i + 1, c(-1.0, -0.2)));
            }
        }
        let a = CsrMatrix::from_triplets(n, n, t).unwrap();
        let x_true: Vec<_> = (0..n).map(|i| c(i as f64, 1.0 - i as f64 * 0.1)).collect();
        let b = a.matvec(&x_true);
        let lu = BandLu::factor(&a).unwrap();
        let x = lu.solve(&b);
        let err: Vec<_> = x.iter().zip(&x_true).map(|(a, b)| a - b).collect();
        assert!(norm2(&err) < 1e-10 * norm2(&x_true));
    }

    #[test]
    fn zero_pivot_reported() {
        let a = CsrMatrix::from_triplets(2, 2, vec![(0, 1, c(1.0, 0.0)), (1, 0, c(1.0, 0.0))])
            .unwrap();
        assert!(matches!(BandLu::factor(&a), Err(Error::Computation { .. })));
    }
}
