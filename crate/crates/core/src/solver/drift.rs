//! First-order coefficients `B` with `|B(x)| ≤ K δ(x)⁻¹`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{point, DiscreteDomain};

/// Exponent of the vanishing profile `K₀ δ^{0.1} δ⁻¹`.
pub const VANISHING_EXPONENT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DriftRule {
    #[default]
    Zero,
    /// Unit vector towards the volume centroid of the domain.
    RadialInward,
    /// Fixed unit vector given by `DriftSpec::direction`.
    ConstantDirection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DriftProfile {
    /// `|B| = K/δ`.
    #[default]
    Critical,
    /// `|B| = K δ^{0.1}/δ`, which is `o(δ⁻¹)` at the boundary.
    Vanishing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct DriftSpec {
    pub k: f64,
    pub rule: DriftRule,
    /// Required for `constant_direction`, ignored otherwise.
    #[serde(default)]
    pub direction: Option<Vec<f64>>,
    #[serde(default)]
    pub profile: DriftProfile,
}

impl DriftSpec {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn radial_inward(k: f64) -> Self {
        Self {
            k,
            rule: DriftRule::RadialInward,
            ..Self::default()
        }
    }

    pub fn constant_direction(k: f64, direction: Vec<f64>) -> Self {
        Self {
            k,
            rule: DriftRule::ConstantDirection,
            direction: Some(direction),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftField {
    spec: DriftSpec,
    values: Vec<[Complex64; 3]>,
}

impl DriftField {
    pub fn build(domain: &DiscreteDomain, spec: &DriftSpec) -> Result<Self> {
        if !(spec.k >= 0.0) || !spec.k.is_finite() {
            return Err(Error::Config(format!("drift K = {} must be finite and ≥ 0", spec.k)));
        }
        let dim = domain.dim();
        let unit: Option<[f64; 3]> = match spec.rule {
            DriftRule::ConstantDirection => {
                let direction = spec.direction.as_deref().ok_or_else(|| {
                    Error::Config("constant_direction drift needs a direction".into())
                })?;
                if direction.len() != dim {
                    return Err(Error::Config(format!(
                        "drift direction has {} components, domain has dimension {dim}",
                        direction.len()
                    )));
                }
                let mut v = [0.0; 3];
                v[..dim].copy_from_slice(direction);
                let n = point::norm(&v);
                if !(n > 0.0) {
                    return Err(Error::Config("drift direction must be nonzero".into()));
                }
                Some(v.map(|c| c / n))
            }
            _ => None,
        };
        let centroid = domain.centroid();
        let zero = [Complex64::new(0.0, 0.0); 3];
        let values = domain
            .cells()
            .iter()
            .map(|cell| {
                if spec.k == 0.0 || spec.rule == DriftRule::Zero {
                    return zero;
                }
                let dir = match unit {
                    Some(u) => u,
                    _ => {
                        let v = point::sub(&centroid, &cell.center);
                        let n = point::norm(&v);
                        if n < 1e-12 {
                            return zero;
                        }
                        v.map(|c| c / n)
                    }
                };
                let mag = match spec.profile {
                    DriftProfile::Critical => spec.k / cell.delta,
                    DriftProfile::Vanishing => {
                        spec.k * cell.delta.powf(VANISHING_EXPONENT) / cell.delta
                    }
                };
                dir.map(|c| Complex64::new(mag * c, 0.0))
            })
            .collect();
        Ok(Self {
            spec: spec.clone(),
            values,
        })
    }

    pub fn spec(&self) -> &DriftSpec {
        &self.spec
    }

    pub fn at_cell(&self, cell: usize) -> &[Complex64; 3] {
        &self.values[cell]
    }

    pub fn is_zero(&self) -> bool {
        self.values
            .iter()
            .all(|v| v.iter().all(|c| *c == Complex64::new(0.0, 0.0)))
    }

    /// `sup |B(x)| δ(x)` over cells.
    pub fn effective_k(&self, domain: &DiscreteDomain) -> f64 {
        self.values
            .iter()
            .zip(domain.cells())
            .map(|(b, c)| b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() * c.delta)
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainPreset;

    #[test]
    fn magnitude_bound_is_exact() {
        let d = DiscreteDomain::build(&DomainPreset::Square { side: 1.0 }, 1.0 / 16.0).unwrap();
        let f = DriftField::build(&d, &DriftSpec::radial_inward(0.1)).unwrap();
        for (i, c) in d.cells().iter().enumerate() {
            let b = f.at_cell(i);
            let m = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert!(m * c.delta <= 0.1 * (1.0 + 1e-12));
        }
        assert!((f.effective_k(&d) - 0.1).abs() < 1e-12);
        let z = DriftField::build(&d, &DriftSpec::zero()).unwrap();
        assert!(z.is_zero());
        assert!(DriftField::build(&d, &DriftSpec::constant_direction(1.0, vec![1.0])).is_err());
        let mut v = DriftSpec::radial_inward(1.0);
        v.profile = DriftProfile::Vanishing;
        let f = DriftField::build(&d, &v).unwrap();
        assert!(f.effective_k(&d) <= 0.5f64.powf(0.1) + 1e-12);
    }
}
