//! ILU(0)-preconditioned Krylov iterations.

use num_complex::Complex64;

use super::sparse::{axpy, dotc, norm2, CsrMatrix};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Incomplete LU on the sparsity pattern of the matrix.
#[derive(Debug, Clone)]
pub struct Ilu0 {
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    lu: Vec<Complex64>,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let n = a.n_rows();
        let row_ptr = a.row_ptr().to_vec();
        let col_idx = a.col_idx().to_vec();
        let mut lu = a.values().to_vec();
        let mut diag = vec![usize::MAX; n];
        for i in 0..n {
            for k in row_ptr[i]..row_ptr[i + 1] {
                if col_idx[k] == i {
                    diag[i] = k;
                }
            }
            if diag[i] == usize::MAX {
                return Err(Error::computation(
                    format!("ILU(0): row {i} has no diagonal entry"),
                    vec![],
                ));
            }
        }
        let mut pos = vec![usize::MAX; n];
        for i in 0..n {
            let (s, e) = (row_ptr[i], row_ptr[i + 1]);
            for k in s..e {
                pos[col_idx[k]] = k;
            }
            for kk in s..e {
                let k = col_idx[kk];
                if k >= i {
                    break;
                }
                let piv = lu[diag[k]];
                if piv.norm() == 0.0 {
                    return Err(Error::computation(format!("ILU(0): zero pivot {k}"), vec![]));
                }
                let l = lu[kk] / piv;
                lu[kk] = l;
                for jj in diag[k] + 1..row_ptr[k + 1] {
                    let p = pos[col_idx[jj]];
                    if p != usize::MAX {
                        let u = lu[jj];
                        lu[p] -= l * u;
                    }
                }
            }
            for k in s..e {
                pos[col_idx[k]] = usize::MAX;
            }
        }
        Ok(Self {
            row_ptr,
            col_idx,
            lu,
            diag,
        })
    }

    /// `z = (LU)⁻¹ r`.
    pub fn apply(&self, r: &[Complex64]) -> Vec<Complex64> {
        let n = self.diag.len();
        let mut z = r.to_vec();
        for i in 0..n {
            let mut acc = z[i];
            for k in self.row_ptr[i]..self.diag[i] {
                acc -= self.lu[k] * z[self.col_idx[k]];
            }
            z[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = z[i];
            for k in self.diag[i] + 1..self.row_ptr[i + 1] {
                acc -= self.lu[k] * z[self.col_idx[k]];
            }
            z[i] = acc / self.lu[self.diag[i]];
        }
        z
    }
}

#[derive(Debug, Clone)]
pub struct IterOutcome {
    pub x: Vec<Complex64>,
    pub iterations: usize,
    pub converged: bool,
    /// Relative residual `‖b − Ax‖/‖b‖` after each iteration.
    pub history: Vec<f64>,
}

fn true_residual(a: &CsrMatrix, x: &[Complex64], b: &[Complex64]) -> f64 {
    let ax = a.matvec(x);
    let r: Vec<_> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    norm2(&r) / norm2(b).max(f64::MIN_POSITIVE)
}

/// Right-preconditioned BiCGSTAB.
pub fn bicgstab(
    a: &CsrMatrix,
    m: &Ilu0,
    b: &[Complex64],
    x0: Option<&[Complex64]>,
    tol: f64,
    max_iter: usize,
) -> IterOutcome {
    let n = b.len();
    let bnorm = norm2(b).max(f64::MIN_POSITIVE);
    let mut x = x0.map_or_else(|| vec![ZERO; n], <[_]>::to_vec);
    let ax = a.matvec(&x);
    let mut r: Vec<_> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let r_hat = r.clone();
    let mut history = vec![norm2(&r) / bnorm];
    if history[0] <= tol {
        return IterOutcome { x, iterations: 0, converged: true, history };
    }
    let (mut rho, mut alpha, mut omega) = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
    let mut v = vec![ZERO; n];
    let mut p = vec![ZERO; n];
    for it in 1..=max_iter {
        let rho_new = dotc(&r_hat, &r);
        if rho_new.norm() < 1e-300 {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        let p_hat = m.apply(&p);
        v = a.matvec(&p_hat);
        let denom = dotc(&r_hat, &v);
        if denom.norm() < 1e-300 {
            break;
        }
        alpha = rho / denom;
        let s: Vec<_> = r.iter().zip(&v).map(|(ri, vi)| ri - alpha * vi).collect();
        axpy(alpha, &p_hat, &mut x);
        let s_norm = norm2(&s) / bnorm;
        if s_norm <= tol {
            history.push(s_norm);
            let rel = true_residual(a, &x, b);
            *history.last_mut().expect("pushed") = rel;
            if rel <= tol {
                return IterOutcome { x, iterations: it, converged: true, history };
            }
            r = s;
            continue;
        }
        let s_hat = m.apply(&s);
        let t = a.matvec(&s_hat);
        let tt = dotc(&t, &t);
        if tt.norm() < 1e-300 {
            break;
        }
        omega = dotc(&t, &s) / tt;
        axpy(omega, &s_hat, &mut x);
        r = s.iter().zip(&t).map(|(si, ti)| si - omega * ti).collect();
        let rel = norm2(&r) / bnorm;
        history.push(rel);
        if rel <= tol {
            let rel = true_residual(a, &x, b);
            *history.last_mut().expect("pushed") = rel;
            if rel <= tol {
                return IterOutcome { x, iterations: it, converged: true, history };
            }
        }
        if omega.norm() < 1e-300 {
            break;
        }
    }
    let iterations = history.len() - 1;
    IterOutcome { x, iterations, converged: false, history }
}

/// Restarted right-preconditioned GMRES(m) with modified Gram–Schmidt.
pub fn gmres(
    a: &CsrMatrix,
    m: &Ilu0,
    b: &[Complex64],
    x0: Option<&[Complex64]>,
    tol: f64,
    restart: usize,
    max_iter: usize,
) -> IterOutcome {
    let n = b.len();
    let bnorm = norm2(b).max(f64::MIN_POSITIVE);
    let mut x = x0.map_or_else(|| vec![ZERO; n], <[_]>::to_vec);
    let mut history = vec![true_residual(a, &x, b)];
    let mut total = 0;
    while total < max_iter {
        let ax = a.matvec(&x);
        let r: Vec<_> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm2(&r);
        if beta / bnorm <= tol {
            return IterOutcome { x, iterations: total, converged: true, history };
        }
        let mut basis: Vec<Vec<Complex64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut hess: Vec<Vec<Complex64>> = Vec::new();
        let mut cs: Vec<(Complex64, Complex64)> = Vec::new();
        let mut g = vec![Complex64::new(beta, 0.0)];
        let mut k_used = 0;
        for k in 0..restart {
            total += 1;
            let z = m.apply(&basis[k]);
            let mut w = a.matvec(&z);
            let mut col = vec![ZERO; k + 2];
            for (j, q) in basis.iter().enumerate() {
                let hj = dotc(q, &w);
                col[j] = hj;
                axpy(-hj, q, &mut w);
            }
            let wn = norm2(&w);
            col[k + 1] = Complex64::new(wn, 0.0);
            for (j, &(c, s)) in cs.iter().enumerate() {
                let (a0, a1) = (col[j], col[j + 1]);
                col[j] = c.conj() * a0 + s.conj() * a1;
                col[j + 1] = -s * a0 + c * a1;
            }
            let (a0, a1) = (col[k], col[k + 1]);
            let rnorm = (a0.norm_sqr() + a1.norm_sqr()).sqrt();
            let (c, s) = if rnorm == 0.0 {
                (Complex64::new(1.0, 0.0), ZERO)
            } else {
                (a0 / rnorm, a1 / rnorm)
            };
            col[k] = Complex64::new(rnorm, 0.0);
            col[k + 1] = ZERO;
            cs.push((c, s));
            let gk = g[k];
            g[k] = c.conj() * gk;
            g.push(-s * gk);
            hess.push(col);
            k_used = k + 1;
            let est = g[k + 1].norm() / bnorm;
            history.push(est);
            if est <= tol || wn < 1e-300 || total >= max_iter {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        let mut y = vec![ZERO; k_used];
        for i in (0..k_used).rev() {
            let mut acc = g[i];
            for j in i + 1..k_used {
                acc -= hess[j][i] * y[j];
            }
            y[i] = acc / hess[i][i];
        }
        let mut update = vec![ZERO; n];
        for (j, yj) in y.iter().enumerate() {
            axpy(*yj, &basis[j], &mut update);
        }
        let dz = m.apply(&update);
        axpy(Complex64::new(1.0, 0.0), &dz, &mut x);
        let rel = true_residual(a, &x, b);
        *history.last_mut().expect("at least one entry") = rel;
        if rel <= tol {
            return IterOutcome { x, iterations: total, converged: true, history };
        }
    }
    IterOutcome { x, iterations: total, converged: false, history }
}

/// Preconditioned conjugate gradients for Hermitian positive definite `a`.
pub fn pcg(
    a: &CsrMatrix,
    m: &Ilu0,
    b: &[Complex64],
    x0: Option<&[Complex64]>,
    tol: f64,
    max_iter: usize,
) -> IterOutcome {
    let n = b.len();
    let bnorm = norm2(b).max(f64::MIN_POSITIVE);
    let mut x = x0.map_or_else(|| vec![ZERO; n], <[_]>::to_vec);
    let ax = a.matvec(&x);
    let mut r: Vec<_> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let mut history = vec![norm2(&r) / bnorm];
    if history[0] <= tol {
        return IterOutcome { x, iterations: 0, converged: true, history };
    }
    let mut z = m.apply(&r);
    let mut p = z.clone();
    let mut rz = dotc(&r, &z);
    for it in 1..=max_iter {
        let ap = a.matvec(&p);
        let pap = dotc(&p, &ap);
        if pap.re <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let rel = norm2(&r) / bnorm;
        history.push(rel);
        if rel <= tol {
            let rel = true_residual(a, &x, b);
            *history.last_mut().expect("pushed") = rel;
            if rel <= tol {
                return IterOutcome { x, iterations: it, converged: true, history };
            }
        }
        z = m.apply(&r);
        let rz_new = dotc(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let iterations = history.len() - 1;
    IterOutcome { x, iterations, converged: false, history }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn laplace_2d(m: usize, z: Complex64, shift: Complex64) -> CsrMatrix {
        let idx = |i: usize, j: usize| i * m + j;
        let mut t = Vec::new();
        for i in 0..m {
            for j in 0..m {
                t.push((idx(i, j), idx(i, j), z * 4.0 + shift));
                if i > 0 {
                    t.push((idx(i, j), idx(i - 1, j), -z));
                }
                if i + 1 < m {
                    t.push((idx(i, j), idx(i + 1, j), -z));
                }
                if j > 0 {
                    t.push((idx(i, j), idx(i, j - 1), -z + shift * 0.3));
                }
                if j + 1 < m {
                    t.push((idx(i, j), idx(i, j + 1), -z - shift * 0.3));
                }
            }
        }
        CsrMatrix::from_triplets(m * m, m * m, t).unwrap()
    }

    fn rhs(n: usize) -> Vec<Complex64> {
        (0..n).map(|i| c((i % 7) as f64 - 3.0, (i % 3) as f64)).collect()
    }

    #[test]
    fn ilu_exact_on_tridiagonal() {
        let a = CsrMatrix::from_triplets(
            3,
            3,
            vec![
                (0, 0, c(2.0, 0.0)), (0, 1, c(-1.0, 0.0)),
                (1, 0, c(-1.0, 0.0)), (1, 1, c(2.0, 0.0)), (1, 2, c(-1.0, 0.0)),
                (2, 1, c(-1.0, 0.0)), (2, 2, c(2.0, 0.0)),
            ],
        )
        .unwrap();
        let m = Ilu0::new(&a).unwrap();
        let b = vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let x = m.apply(&b);
        for xi in x {
            assert!((xi - c(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn krylov_methods_converge() {
        let a = laplace_2d(20, c(1.0, 1.0), c(0.0, 0.0));
        let b = rhs(a.n_rows());
        let m = Ilu0::new(&a).unwrap();
        let o = bicgstab(&a, &m, &b, None, 1e-12, 500);
        assert!(o.converged, "{:?}", o.history.last());
        let o = gmres(&a, &m, &b, None, 1e-12, 40, 2000);
        assert!(o.converged, "{:?}", o.history.last());

        let a = laplace_2d(20, c(1.0, 0.0), c(0.0, 0.0));
        let m = Ilu0::new(&a).unwrap();
        let o = pcg(&a, &m, &b, None, 1e-12, 500);
        assert!(o.converged);
        assert!(true_residual(&a, &o.x, &b) <= 1e-12);
    }

    #[test]
    fn nonsymmetric_system() {
        let a = laplace_2d(16, c(1.0, 0.0), c(0.2, 0.1));
        let b = rhs(a.n_rows());
        let m = Ilu0::new(&a).unwrap();
        let o = bicgstab(&a, &m, &b, None, 1e-12, 500);
        assert!(o.converged);
        assert!(true_residual(&a, &o.x, &b) <= 1e-12);
    }
}
