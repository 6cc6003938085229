//! p-ellipticity of complex coefficient matrices.
//!
//! For `p > 1` the real-linear map `J_p(α + iβ) = α/p + iβ/p'` turns the
//! sesquilinear pairing `Re⟨Aξ, J_pξ⟩` into a real quadratic form on
//! `ℝ^{2n}`. Its smallest eigenvalue is the optimal `λ_p`; the matrix is
//! p-elliptic exactly when that eigenvalue is positive. The set of such `p`
//! is an interval symmetric under `p ↔ p'`, described by the single number
//! `μ(A)` through `|1 − 2/p| < μ(A)`.

use std::fmt;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Tolerance used to decide whether `λ_p` is genuinely positive.
pub const LAMBDA_POSITIVE_TOL: f64 = 1e-12;
/// Absolute tolerance of the bisection for `μ`. The endpoint amplifies
/// errors in `μ` by `2(n−1)/((n−2)(1−μ)²)`, hence the margin below `1e-9`.
pub const MU_BISECTION_TOL: f64 = 1e-13;
/// Upper end of the reported `λ_p` curve when `p₀` is large or infinite.
pub const P_CAP: f64 = 64.0;
/// Number of points on the reported `λ_p` curve.
const LAMBDA_CURVE_POINTS: usize = 41;
/// Entries with `|Im| ≤ REAL_TOL · max(1, ‖A‖)` count as real.
const REAL_TOL: f64 = 1e-14;

/// An exponent that may be `+∞`. Infinity is a dedicated variant and is
/// serialized as the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinite)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Exponent::Finite(v) => Some(v),
            Exponent::Infinite => None,
        }
    }

    /// `true` when `p` lies strictly below this exponent.
    pub fn exceeds(self, p: f64) -> bool {
        match self {
            Exponent::Finite(v) => p < v,
            Exponent::Infinite => p.is_finite(),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(v) => write!(f, "{v}"),
            Exponent::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(v) => s.serialize_f64(*v),
            Exponent::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Exponent::Finite(v)),
            Raw::Str(s) if s == "inf" => Ok(Exponent::Infinite),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("bad exponent {s:?}"))),
        }
    }
}

/// Hölder conjugate `p' = p/(p−1)`.
pub fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

/// Dense `n×n` complex matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Config(format!("matrix dimension {dim} < 2")));
        }
        if entries.len() != dim * dim {
            return Err(Error::Config(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Domain("matrix has non-finite entries".into()));
        }
        Ok(Self { dim, entries })
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(dim, Complex64::new(1.0, 0.0))
    }

    pub fn scalar(dim: usize, z: Complex64) -> Self {
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = z;
        }
        Self { dim, entries }
    }

    pub fn real_diagonal(diag: &[f64]) -> Result<Self> {
        let dim = diag.len();
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for (i, &d) in diag.iter().enumerate() {
            entries[i * dim + i] = Complex64::new(d, 0.0);
        }
        Self::new(dim, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    pub fn scale(&self, z: Complex64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|&a| a * z).collect(),
        }
    }

    /// `Aξ`.
    pub fn apply(&self, xi: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * xi[j]).sum())
            .collect()
    }

    /// Largest singular value, i.e. `sup |⟨Aξ,η⟩|` over unit `ξ, η`.
    pub fn operator_norm(&self) -> f64 {
        let m = DMatrix::from_row_slice(self.dim, self.dim, &self.entries);
        m.singular_values().max()
    }

    pub fn is_real(&self) -> bool {
        let scale = self
            .entries
            .iter()
            .map(|z| z.norm())
            .fold(1.0_f64, f64::max);
        self.entries.iter().all(|z| z.im.abs() <= REAL_TOL * scale)
    }

    /// Smallest eigenvalue of the Hermitian part `(A + A*)/2`.
    pub fn hermitian_part_min_eigenvalue(&self) -> Result<f64> {
        // λ_2 = λ_min(Herm A)/2, so reuse the realified route at p = 2.
        Ok(2.0 * lambda_p(self, 2.0)?)
    }
}

/// Sesquilinear pairing `⟨x, y⟩ = Σ x_i conj(y_i)`.
pub fn pairing(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::Domain(format!("exponent p = {p} must lie in (1, ∞)")));
    }
    Ok(())
}

/// `J_p(α + iβ) = α/p + iβ/p'`.
pub fn jp_apply(p: f64, xi: &[Complex64]) -> Result<Vec<Complex64>> {
    check_p(p)?;
    let pc = conjugate(p);
    Ok(xi
        .iter()
        .map(|z| Complex64::new(z.re / p, z.im / pc))
        .collect())
}

/// Direct complex evaluation of `Re⟨Aξ, J_pξ⟩`.
pub fn form_value(a: &ComplexMatrix, p: f64, xi: &[Complex64]) -> Result<f64> {
    let jx = jp_apply(p, xi)?;
    Ok(pairing(&a.apply(xi), &jx).re)
}

/// Symmetric `2n×2n` matrix `M` with `(α,β)ᵀ M (α,β) = Re⟨Aξ, J_pξ⟩`.
///
/// Expanding the pairing gives the block matrix
/// `[[Ar/p, −Ai/p], [Ai/p', Ar/p']]`; `M` is its symmetric part.
pub fn rayleigh_matrix(a: &ComplexMatrix, p: f64) -> Result<DMatrix<f64>> {
    check_p(p)?;
    let n = a.dim();
    let pc = conjugate(p);
    let mut raw = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = a.get(i, j);
            raw[(i, j)] = z.re / p;
            raw[(i, n + j)] = -z.im / p;
            raw[(n + i, j)] = z.im / pc;
            raw[(n + i, n + j)] = z.re / pc;
        }
    }
    Ok((&raw + raw.transpose()) * 0.5)
}

/// Optimal constant in `Re⟨Aξ, J_pξ⟩ ≥ λ_p|ξ|²`. Non-positive values mean the
/// matrix is not p-elliptic.
pub fn lambda_p(a: &ComplexMatrix, p: f64) -> Result<f64> {
    let m = rayleigh_matrix(a, p)?;
    let eig = m.clone().try_symmetric_eigen(1e-15, 10_000).ok_or_else(|| {
        Error::computation(
            format!("symmetric eigensolver did not converge for p = {p}"),
            m.iter().copied().collect(),
        )
    })?;
    Ok(eig.eigenvalues.min())
}

/// Minimizing direction of the realified form, returned as `ξ = α + iβ`.
pub fn lambda_p_direction(a: &ComplexMatrix, p: f64) -> Result<(f64, Vec<Complex64>)> {
    let m = rayleigh_matrix(a, p)?;
    let eig = m
        .try_symmetric_eigen(1e-15, 10_000)
        .ok_or_else(|| Error::computation("symmetric eigensolver did not converge", vec![]))?;
    let idx = eig.eigenvalues.imin();
    let v: DVector<f64> = eig.eigenvectors.column(idx).into_owned();
    let n = a.dim();
    let xi = (0..n).map(|i| Complex64::new(v[i], v[n + i])).collect();
    Ok((eig.eigenvalues[idx], xi))
}

/// The two exponents with `|1 − 2/p| = s`, for `s ∈ [0, 1)`.
pub fn exponents_at_level(s: f64) -> (f64, f64) {
    (2.0 / (1.0 + s), 2.0 / (1.0 - s))
}

/// μ of a single matrix by bisection on `s = |1 − 2/p|`.
pub fn mu_of_matrix(a: &ComplexMatrix) -> Result<f64> {
    let l2 = lambda_p(a, 2.0)?;
    if l2 <= LAMBDA_POSITIVE_TOL {
        return Err(Error::Domain(format!(
            "matrix is not 2-elliptic (λ₂ = {l2:.3e})"
        )));
    }
    if a.is_real() {
        return Ok(1.0);
    }
    let elliptic_at = |s: f64| -> Result<bool> {
        let (lo, hi) = exponents_at_level(s);
        Ok(lambda_p(a, lo)? > LAMBDA_POSITIVE_TOL && lambda_p(a, hi)? > LAMBDA_POSITIVE_TOL)
    };
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > MU_BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if elliptic_at(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Named matrix presets addressable from configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum MatrixPreset {
    Identity,
    ScalarComplex {
        tau: f64,
    },
    RealSpd {
        eigenvalues: Vec<f64>,
    },
    /// `diag(base) + iε·E` with `E` the all-ones matrix.
    PerturbedReal {
        base: Vec<f64>,
        epsilon: f64,
    },
    GridSampled {
        path: String,
    },
}

impl MatrixPreset {
    pub fn name(&self) -> &'static str {
        match self {
            MatrixPreset::Identity => "identity",
            MatrixPreset::ScalarComplex { .. } => "scalar_complex",
            MatrixPreset::RealSpd { .. } => "real_spd",
            MatrixPreset::PerturbedReal { .. } => "perturbed_real",
            MatrixPreset::GridSampled { .. } => "grid_sampled",
        }
    }
}

/// Coefficient field `A(x)`, sampled per discretization cell.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixField {
    dim: usize,
    label: String,
    rule: FieldRule,
    operator_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
enum FieldRule {
    Constant(ComplexMatrix),
    Sampled(Vec<ComplexMatrix>),
}

impl MatrixField {
    pub fn constant(a: ComplexMatrix) -> Result<Self> {
        let label = format!("constant{}x{}", a.dim(), a.dim());
        Self::build(a.dim(), label, FieldRule::Constant(a))
    }

    pub fn sampled(samples: Vec<ComplexMatrix>) -> Result<Self> {
        let dim = samples
            .first()
            .map(|m| m.dim())
            .ok_or_else(|| Error::Config("empty sampled field".into()))?;
        if samples.iter().any(|m| m.dim() != dim) {
            return Err(Error::Config("sampled field mixes dimensions".into()));
        }
        Self::build(dim, "grid_sampled".into(), FieldRule::Sampled(samples))
    }

    pub fn from_preset(preset: &MatrixPreset, dim: usize) -> Result<Self> {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let field = match preset {
            MatrixPreset::Identity => Self::constant(ComplexMatrix::identity(dim))?,
            MatrixPreset::ScalarComplex { tau } => {
                Self::constant(ComplexMatrix::scalar(dim, c(1.0, *tau)))?
            }
            MatrixPreset::RealSpd { eigenvalues } => {
                if eigenvalues.len() != dim {
                    return Err(Error::Config(format!(
                        "real_spd needs {dim} eigenvalues, got {}",
                        eigenvalues.len()
                    )));
                }
                Self::constant(ComplexMatrix::real_diagonal(eigenvalues)?)?
            }
            MatrixPreset::PerturbedReal { base, epsilon } => {
                if base.len() != dim {
                    return Err(Error::Config(format!(
                        "perturbed_real needs {dim} base entries, got {}",
                        base.len()
                    )));
                }
                let mut entries = vec![c(0.0, *epsilon); dim * dim];
                for i in 0..dim {
                    entries[i * dim + i] = c(base[i], *epsilon);
                }
                Self::constant(ComplexMatrix::new(dim, entries)?)?
            }
            MatrixPreset::GridSampled { path } => Self::from_csv(Path::new(path), dim)?,
        };
        Ok(field.with_label(preset_label(preset)))
    }

    /// Reads a per-cell table: `cell_index` followed by `2n²` reals, re/im
    /// pairs in row-major order.
    pub fn from_csv(path: &Path, dim: usize) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)?;
        let mut rows: Vec<(usize, ComplexMatrix)> = Vec::new();
        for rec in reader.records() {
            let rec = rec?;
            if rec.len() != 1 + 2 * dim * dim {
                return Err(Error::Config(format!(
                    "grid row has {} columns, expected {}",
                    rec.len(),
                    1 + 2 * dim * dim
                )));
            }
            let parse = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|e| Error::Config(format!("bad number {s:?}: {e}")))
            };
            let idx = rec[0]
                .parse::<usize>()
                .map_err(|e| Error::Config(format!("bad cell index {:?}: {e}", &rec[0])))?;
            let mut entries = Vec::with_capacity(dim * dim);
            for k in 0..dim * dim {
                entries.push(Complex64::new(
                    parse(&rec[1 + 2 * k])?,
                    parse(&rec[2 + 2 * k])?,
                ));
            }
            rows.push((idx, ComplexMatrix::new(dim, entries)?));
        }
        rows.sort_by_key(|(i, _)| *i);
        for (expected, (idx, _)) in rows.iter().enumerate() {
            if *idx != expected {
                return Err(Error::Config(format!(
                    "grid table must list cells 0..N once each; found index {idx} at position {expected}"
                )));
            }
        }
        Self::sampled(rows.into_iter().map(|(_, m)| m).collect())
    }

    fn build(dim: usize, label: String, rule: FieldRule) -> Result<Self> {
        let samples: &[ComplexMatrix] = match &rule {
            FieldRule::Constant(a) => std::slice::from_ref(a),
            FieldRule::Sampled(v) => v,
        };
        let mut bound = 0.0_f64;
        for (i, a) in samples.iter().enumerate() {
            let l2 = lambda_p(a, 2.0)?;
            if l2 <= LAMBDA_POSITIVE_TOL {
                return Err(Error::Domain(format!(
                    "sample {i} is not 2-elliptic (λ₂ = {l2:.3e})"
                )));
            }
            bound = bound.max(a.operator_norm());
        }
        Ok(Self {
            dim,
            label,
            rule,
            operator_bound: bound,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Multiplies every sample by a complex scalar; 2-ellipticity is rechecked.
    pub fn scaled(&self, z: Complex64) -> Result<Self> {
        let rule = match &self.rule {
            FieldRule::Constant(a) => FieldRule::Constant(a.scale(z)),
            FieldRule::Sampled(v) => FieldRule::Sampled(v.iter().map(|a| a.scale(z)).collect()),
        };
        Self::build(self.dim, format!("{}*({z})", self.label), rule)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `sup` of the operator norm over samples.
    pub fn operator_bound(&self) -> f64 {
        self.operator_bound
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.rule, FieldRule::Constant(_))
    }

    /// Number of cells the field is tabulated on, `None` for constant fields.
    pub fn sample_count(&self) -> Option<usize> {
        match &self.rule {
            FieldRule::Constant(_) => None,
            FieldRule::Sampled(v) => Some(v.len()),
        }
    }

    pub fn samples(&self) -> &[ComplexMatrix] {
        match &self.rule {
            FieldRule::Constant(a) => std::slice::from_ref(a),
            FieldRule::Sampled(v) => v,
        }
    }

    /// Coefficient matrix on cell `cell`.
    pub fn at_cell(&self, cell: usize) -> &ComplexMatrix {
        match &self.rule {
            FieldRule::Constant(a) => a,
            FieldRule::Sampled(v) => &v[cell],
        }
    }

    pub fn is_real(&self) -> bool {
        self.samples().iter().all(ComplexMatrix::is_real)
    }

    /// `λ_p` of the field: the minimum over samples.
    pub fn lambda_p(&self, p: f64) -> Result<f64> {
        let vals = self
            .samples()
            .par_iter()
            .map(|a| lambda_p(a, p))
            .collect::<Result<Vec<_>>>()?;
        Ok(vals.into_iter().fold(f64::INFINITY, f64::min))
    }
}

fn preset_label(preset: &MatrixPreset) -> String {
    match preset {
        MatrixPreset::Identity => "identity".into(),
        MatrixPreset::ScalarComplex { tau } => format!("scalar_complex(tau={tau})"),
        MatrixPreset::RealSpd { eigenvalues } => format!("real_spd({eigenvalues:?})"),
        MatrixPreset::PerturbedReal { base, epsilon } => {
            format!("perturbed_real(base={base:?},epsilon={epsilon})")
        }
        MatrixPreset::GridSampled { path } => format!("grid_sampled({path})"),
    }
}

/// `μ` of a field: the minimum over its samples, exactly 1 for real fields.
pub fn mu_of(field: &MatrixField) -> Result<f64> {
    let mus = field
        .samples()
        .par_iter()
        .map(mu_of_matrix)
        .collect::<Result<Vec<_>>>()?;
    Ok(mus.into_iter().fold(1.0, f64::min))
}

/// Summary of the p-ellipticity of a field on an `n`-dimensional domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipticityReport {
    pub mu: f64,
    pub p_lower: Exponent,
    /// `p₀ = sup{p > 1 : A is p-elliptic}`.
    pub p_upper: Exponent,
    pub lambda_samples: Vec<(f64, f64)>,
    /// `p₀(n−1)/(n−2)`, infinite for `n = 2` or `p₀ = ∞`.
    pub endpoint: Exponent,
    pub tolerance: f64,
    pub dim: usize,
}

impl EllipticityReport {
    /// `true` when `p` lies strictly inside the p-elliptic interval.
    pub fn contains(&self, p: f64) -> bool {
        let lower = self.p_lower.finite().unwrap_or(1.0);
        p > lower && self.p_upper.exceeds(p)
    }
}

/// Solvability endpoint `p₀(n−1)/(n−2)`.
pub fn solvability_endpoint(p0: Exponent, n: usize) -> Exponent {
    match p0 {
        _ if n == 2 => Exponent::Infinite,
        Exponent::Infinite => Exponent::Infinite,
        Exponent::Finite(p0) => Exponent::Finite(p0 * (n as f64 - 1.0) / (n as f64 - 2.0)),
    }
}

pub fn p_ellipticity_range(field: &MatrixField, n: usize) -> Result<EllipticityReport> {
    if n < 2 {
        return Err(Error::Config(format!("dimension {n} < 2")));
    }
    let mu = mu_of(field)?;
    let (p_lower, p_upper) = if mu >= 1.0 {
        (Exponent::Finite(1.0), Exponent::Infinite)
    } else {
        (
            Exponent::Finite(2.0 / (1.0 + mu)),
            Exponent::Finite(2.0 / (1.0 - mu)),
        )
    };
    let lo = if mu >= 1.0 {
        1.0 + 1.0 / P_CAP
    } else {
        (0.9 * 2.0 / (1.0 + mu)).max(1.0 + 1e-6)
    };
    let hi = match p_upper {
        Exponent::Finite(v) => (1.1 * v).min(P_CAP),
        Exponent::Infinite => P_CAP,
    };
    let lambda_samples = log_grid(lo, hi, LAMBDA_CURVE_POINTS)
        .into_iter()
        .map(|p| Ok((p, field.lambda_p(p)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(EllipticityReport {
        mu,
        p_lower,
        p_upper,
        lambda_samples,
        endpoint: solvability_endpoint(p_upper, n),
        tolerance: LAMBDA_POSITIVE_TOL,
        dim: n,
    })
}

fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx_eq::assert_close;

    mod approx_eq {
        macro_rules! assert_close {
            ($a:expr, $b:expr, $tol:expr) => {{
                let (a, b): (f64, f64) = ($a, $b);
                assert!((a - b).abs() <= $tol, "{a} vs {b} (tol {})", $tol);
            }};
        }
        pub(crate) use assert_close;
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn jp_examples() {
        let xi = vec![c(0.3, -1.2), c(2.0, 0.5)];
        let out = jp_apply(2.0, &xi).unwrap();
        for (o, x) in out.iter().zip(&xi) {
            assert_close!((o - x / 2.0).norm(), 0.0, 1e-15);
        }
        assert_eq!(jp_apply(4.0, &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap()[0], c(0.25, 0.0));
        assert_eq!(jp_apply(4.0, &[c(0.0, 1.0), c(0.0, 0.0)]).unwrap()[0], c(0.0, 0.75));
        assert!(matches!(jp_apply(1.0, &xi), Err(Error::Domain(_))));
        assert!(matches!(jp_apply(0.5, &xi), Err(Error::Domain(_))));
    }

    #[test]
    fn rayleigh_identity() {
        let m = rayleigh_matrix(&ComplexMatrix::identity(2), 2.0).unwrap();
        assert_eq!(m, DMatrix::identity(4, 4) * 0.5);
        let m = rayleigh_matrix(&ComplexMatrix::identity(2), 4.0).unwrap();
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![0.25, 0.25, 0.75, 0.75]));
        assert!((m - d).abs().max() < 1e-15);
    }

    #[test]
    fn rayleigh_complex_scalar_coupling() {
        let a = ComplexMatrix::scalar(2, c(1.0, 1.0));
        let m = rayleigh_matrix(&a, 4.0).unwrap();
        for i in 0..2 {
            assert_close!(m[(i, i)], 0.25, 1e-15);
            assert_close!(m[(2 + i, 2 + i)], 0.75, 1e-15);
            assert_close!(m[(i, 2 + i)], 0.25, 1e-15);
            assert_close!(m[(2 + i, i)], 0.25, 1e-15);
        }
    }

    #[test]
    fn lambda_examples() {
        for n in [2, 3, 4] {
            assert_close!(lambda_p(&ComplexMatrix::identity(n), 2.0).unwrap(), 0.5, 1e-14);
        }
        assert_close!(lambda_p(&ComplexMatrix::identity(2), 4.0).unwrap(), 0.25, 1e-14);
        let a = ComplexMatrix::scalar(2, c(1.0, 1.0));
        assert_close!(lambda_p(&a, 2.0).unwrap(), 0.5, 1e-14);
    }

    #[test]
    fn mu_examples() {
        let real = MatrixField::from_preset(
            &MatrixPreset::RealSpd {
                eigenvalues: vec![1.0, 3.0, 0.5],
            },
            3,
        )
        .unwrap();
        assert_eq!(mu_of(&real).unwrap(), 1.0);
        for tau in [1.0, 2.0] {
            let f = MatrixField::from_preset(&MatrixPreset::ScalarComplex { tau }, 2).unwrap();
            assert_close!(mu_of(&f).unwrap(), (1.0 + tau * tau).powf(-0.5), 2e-9);
        }
    }

    #[test]
    fn not_two_elliptic_is_rejected() {
        let a = ComplexMatrix::scalar(2, c(-1.0, 0.2));
        assert!(matches!(mu_of_matrix(&a), Err(Error::Domain(_))));
        assert!(matches!(MatrixField::constant(a), Err(Error::Domain(_))));
    }

    #[test]
    fn range_report() {
        let real = MatrixField::from_preset(&MatrixPreset::Identity, 3).unwrap();
        let r = p_ellipticity_range(&real, 3).unwrap();
        assert!(r.endpoint.is_infinite());
        assert!(r.p_upper.is_infinite());

        let f = MatrixField::from_preset(&MatrixPreset::ScalarComplex { tau: 1.0 }, 3).unwrap();
        let r = p_ellipticity_range(&f, 3).unwrap();
        let p0 = 4.0 + 2.0 * 2f64.sqrt();
        assert_close!(r.p_upper.finite().unwrap(), p0, 1e-7);
        assert_close!(r.endpoint.finite().unwrap(), 2.0 * p0, 2e-7);
        let pl = r.p_lower.finite().unwrap();
        assert_close!(1.0 / pl + 1.0 / r.p_upper.finite().unwrap(), 1.0, 1e-12);
        for &(p, l) in &r.lambda_samples {
            let s = (1.0 - 2.0 / p).abs();
            if (s - r.mu).abs() > 1e-6 {
                assert_eq!(s < r.mu, l > r.tolerance, "p = {p}, λ = {l}");
            }
        }
        let r2 = p_ellipticity_range(&f, 2).unwrap();
        assert!(r2.endpoint.is_infinite());
    }

    #[test]
    fn exponent_json() {
        let v = serde_json::to_string(&vec![Exponent::Finite(2.5), Exponent::Infinite]).unwrap();
        assert_eq!(v, r#"[2.5,"inf"]"#);
        let back: Vec<Exponent> = serde_json::from_str(&v).unwrap();
        assert_eq!(back, vec![Exponent::Finite(2.5), Exponent::Infinite]);
    }

    #[test]
    fn grid_sampled_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.csv");
        std::fs::write(&path, "1, 2,0, 0,0, 0,0, 2,0\n0, 1,1, 0,0, 0,0, 1,1\n").unwrap();
        let f = MatrixField::from_csv(&path, 2).unwrap();
        assert_eq!(f.sample_count(), Some(2));
        assert_eq!(f.at_cell(0).get(0, 0), c(1.0, 1.0));
        assert_close!(mu_of(&f).unwrap(), 0.5f64.sqrt(), 2e-9);

        std::fs::write(&path, "0, 1,0, 0,0\n").unwrap();
        assert!(matches!(MatrixField::from_csv(&path, 2), Err(Error::Config(_))));
    }
}
