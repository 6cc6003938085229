//! Extreme eigenvalues of Hermitian pencils `A x = λ B x` with `B` positive
//! definite, by Lanczos in the `B` inner product with full
//! reorthogonalization.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sparse::{axpy, dotc};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct LanczosOutcome {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
    /// Residual bounds `|β_m s_m|` of the two extreme Ritz pairs.
    pub min_residual: f64,
    pub max_residual: f64,
}

/// `apply_a(v)` returns `A v`, `apply_b(v)` returns `B v` and `solve_b(v)`
/// returns `B⁻¹ v`.
pub fn lanczos_pencil<FA, FB, FS>(
    n: usize,
    apply_a: FA,
    apply_b: FB,
    solve_b: FS,
    max_steps: usize,
    seed: u64,
) -> Result<LanczosOutcome>
where
    FA: Fn(&[Complex64]) -> Vec<Complex64>,
    FB: Fn(&[Complex64]) -> Vec<Complex64>,
    FS: Fn(&[Complex64]) -> Result<Vec<Complex64>>,
{
    if n == 0 {
        return Err(Error::Degenerate("empty eigenproblem".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, 0.0))
        .collect();
    let bq = apply_b(&q);
    let nb = dotc(&q, &bq).re.sqrt();
    q.iter_mut().for_each(|v| *v /= nb);
    let mut qs: Vec<Vec<Complex64>> = Vec::new();
    let mut bqs: Vec<Vec<Complex64>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let steps_cap = max_steps.min(n);
    let mut scale = 0.0_f64;
    for _ in 0..steps_cap {
        let bq = apply_b(&q);
        let aq = apply_a(&q);
        let alpha = dotc(&q, &aq).re;
        alphas.push(alpha);
        scale = scale.max(alpha.abs());
        let mut w = solve_b(&aq)?;
        qs.push(q.clone());
        bqs.push(bq);
        // Two passes of classical Gram–Schmidt in the B inner product.
        for _ in 0..2 {
            for (qi, bqi) in qs.iter().zip(&bqs) {
                let coef = dotc(bqi, &w);
                axpy(-coef, qi, &mut w);
            }
        }
        let bw = apply_b(&w);
        let beta = dotc(&w, &bw).re.max(0.0).sqrt();
        scale = scale.max(beta);
        if beta <= 1e-10 * scale.max(f64::MIN_POSITIVE) || qs.len() == steps_cap {
            betas.push(beta);
            break;
        }
        betas.push(beta);
        q = w.iter().map(|v| v / beta).collect();
    }
    let m = alphas.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alphas[i];
        if i + 1 < m {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = SymmetricEigen::try_new(t, 1e-15, 10_000)
        .ok_or_else(|| Error::computation("tridiagonal eigensolver did not converge", alphas.clone()))?;
    let (imin, imax) = (eig.eigenvalues.imin(), eig.eigenvalues.imax());
    let beta_m = *betas.last().unwrap_or(&0.0);
    let res = |i: usize| (beta_m * eig.eigenvectors[(m - 1, i)]).abs();
    Ok(LanczosOutcome {
        min: eig.eigenvalues[imin],
        max: eig.eigenvalues[imax],
        steps: m,
        min_residual: res(imin),
        max_residual: res(imax),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_pencil() {
        let n = 40;
        let a: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
        let b: Vec<f64> = (0..n).map(|i| 1.0 + (i % 3) as f64).collect();
        let out = lanczos_pencil(
            n,
            |v| v.iter().zip(&a).map(|(x, d)| x * d).collect(),
            |v| v.iter().zip(&b).map(|(x, d)| x * d).collect(),
            |v| Ok(v.iter().zip(&b).map(|(x, d)| x / d).collect()),
            n,
            7,
        )
        .unwrap();
        let ratios: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x / y).collect();
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().copied().fold(0.0, f64::max);
        assert!((out.min - lo).abs() < 1e-9, "{} vs {lo}", out.min);
        assert!((out.max - hi).abs() < 1e-9, "{} vs {hi}", out.max);
    }

    #[test]
    fn breakdown_on_scalar_pencil() {
        let out = lanczos_pencil(
            30,
            |v| v.iter().map(|x| x * 3.0).collect(),
            |v| v.to_vec(),
            |v| Ok(v.to_vec()),
            50,
            1,
        )
        .unwrap();
        assert_eq!(out.steps, 1);
        assert!((out.min - 3.0).abs() < 1e-13);
    }
}
