//! Dirichlet data families.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{point, DiscreteDomain, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polynomial {
    X,
    Y,
    Z,
    Xy,
    /// `x² − y²`.
    X2MinusY2,
    /// `Re (x + iy)⁴ = x⁴ − 6x²y² + y⁴`.
    ReZ4,
}

impl Polynomial {
    pub fn from_name(name: &str) -> Result<Self> {
        Ok(match name {
            "x" => Polynomial::X,
            "y" => Polynomial::Y,
            "z" => Polynomial::Z,
            "xy" => Polynomial::Xy,
            "x2-y2" | "x2_minus_y2" => Polynomial::X2MinusY2,
            "re_z4" => Polynomial::ReZ4,
            other => return Err(Error::Config(format!("unknown polynomial {other:?}"))),
        })
    }

    pub fn eval(self, x: &Point) -> f64 {
        let (a, b, c) = (x[0], x[1], x[2]);
        match self {
            Polynomial::X => a,
            Polynomial::Y => b,
            Polynomial::Z => c,
            Polynomial::Xy => a * b,
            Polynomial::X2MinusY2 => a * a - b * b,
            Polynomial::ReZ4 => a.powi(4) - 6.0 * a * a * b * b + b.powi(4),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataFamily {
    Constant {
        re: f64,
        #[serde(default)]
        im: f64,
    },
    PolynomialTrace {
        polynomial: Polynomial,
    },
    /// Sum of `count` bumps `a_k (1 − |x−c_k|²/s²)²₊` with boundary centers
    /// and complex amplitudes drawn from `seed`.
    RandomBumps {
        seed: u64,
        count: usize,
        scale: f64,
    },
    /// Single bump `(1 − |x−Q|²/r²)²₊`.
    Atom {
        center: Vec<f64>,
        radius: f64,
    },
    /// `base` multiplied by a ramp that vanishes on `B(Q, R)` and reaches 1
    /// at `|x − Q| = 2R`.
    ZeroOn {
        center: Vec<f64>,
        radius: f64,
        base: Box<DataFamily>,
    },
}

impl DataFamily {
    pub fn constant(v: f64) -> Self {
        DataFamily::Constant { re: v, im: 0.0 }
    }

    pub fn label(&self) -> String {
        match self {
            DataFamily::Constant { re, im } => format!("constant({re}{im:+}i)"),
            DataFamily::PolynomialTrace { polynomial } => {
                format!("polynomial({})", serde_json::to_string(polynomial).unwrap_or_default().trim_matches('"'))
            }
            DataFamily::RandomBumps { seed, count, scale } => {
                format!("bumps(seed={seed},count={count},scale={scale})")
            }
            DataFamily::Atom { center, radius } => format!("atom({center:?},{radius})"),
            DataFamily::ZeroOn { center, radius, base } => {
                format!("zero_on({center:?},{radius},{})", base.label())
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, DataFamily::Constant { .. })
    }
}

fn bump(x: &Point, c: &Point, s: f64) -> f64 {
    let t = 1.0 - point::dist(x, c).powi(2) / (s * s);
    if t > 0.0 {
        t * t
    } else {
        0.0
    }
}

fn to_point(v: &[f64], dim: usize) -> Result<Point> {
    if v.len() != dim {
        return Err(Error::Config(format!(
            "point {v:?} has {} coordinates, domain has dimension {dim}",
            v.len()
        )));
    }
    let mut p = [0.0; 3];
    p[..dim].copy_from_slice(v);
    Ok(p)
}

#[derive(Debug, Clone, PartialEq)]
enum Rule {
    Constant(Complex64),
    Polynomial(Polynomial),
    Bumps(Vec<(Point, Complex64)>, f64),
    Atom(Point, f64),
    ZeroOn(Point, f64, Box<Rule>),
}

impl Rule {
    fn compile(family: &DataFamily, domain: &DiscreteDomain) -> Result<Self> {
        let dim = domain.dim();
        Ok(match family {
            DataFamily::Constant { re, im } => Rule::Constant(Complex64::new(*re, *im)),
            DataFamily::PolynomialTrace { polynomial } => {
                if *polynomial == Polynomial::Z && dim < 3 {
                    return Err(Error::Config("polynomial z needs a 3D domain".into()));
                }
                Rule::Polynomial(*polynomial)
            }
            DataFamily::RandomBumps { seed, count, scale } => {
                if !(*scale > 0.0) || *count == 0 {
                    return Err(Error::Config("bumps need count ≥ 1 and scale > 0".into()));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let bumps = (0..*count)
                    .map(|_| {
                        let c = domain.sample_boundary_point(&mut rng);
                        let a = Complex64::new(
                            rng.random::<f64>() * 2.0 - 1.0,
                            rng.random::<f64>() * 2.0 - 1.0,
                        );
                        (c, a)
                    })
                    .collect();
                Rule::Bumps(bumps, *scale)
            }
            DataFamily::Atom { center, radius } => {
                if !(*radius > 0.0) {
                    return Err(Error::Config("atom radius must be positive".into()));
                }
                Rule::Atom(to_point(center, dim)?, *radius)
            }
            DataFamily::ZeroOn { center, radius, base } => {
                if !(*radius > 0.0) {
                    return Err(Error::Config("zero_on radius must be positive".into()));
                }
                Rule::ZeroOn(to_point(center, dim)?, *radius, Box::new(Self::compile(base, domain)?))
            }
        })
    }

    fn eval(&self, x: &Point) -> Complex64 {
        match self {
            Rule::Constant(c) => *c,
            Rule::Polynomial(p) => Complex64::new(p.eval(x), 0.0),
            Rule::Bumps(b, s) => b.iter().map(|(c, a)| a * bump(x, c, *s)).sum(),
            Rule::Atom(c, r) => Complex64::new(bump(x, c, *r), 0.0),
            Rule::ZeroOn(c, r, base) => {
                let ramp = ((point::dist(x, c) - r) / r).clamp(0.0, 1.0);
                if ramp == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    base.eval(x) * ramp
                }
            }
        }
    }
}

/// Boundary data compiled against a domain: a rule evaluable at any boundary
/// point plus its values at the face centroids.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    family: DataFamily,
    rule: Rule,
    face_values: Vec<Complex64>,
}

impl BoundaryData {
    pub fn new(domain: &DiscreteDomain, family: &DataFamily) -> Result<Self> {
        let rule = Rule::compile(family, domain)?;
        let face_values: Vec<Complex64> =
            domain.faces().iter().map(|f| rule.eval(&f.centroid)).collect();
        if face_values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Domain("boundary data has non-finite values".into()));
        }
        Ok(Self {
            family: family.clone(),
            rule,
            face_values,
        })
    }

    pub fn family(&self) -> &DataFamily {
        &self.family
    }

    pub fn face_values(&self) -> &[Complex64] {
        &self.face_values
    }

    /// Value at an arbitrary point of `∂Ω`.
    pub fn eval(&self, x: &Point) -> Complex64 {
        self.rule.eval(x)
    }

    /// Value assigned to a mesh node: the datum at the nearest boundary point.
    pub fn node_value(&self, domain: &DiscreteDomain, x: &Point) -> Complex64 {
        self.rule.eval(&domain.boundary().closest_point(x))
    }

    pub fn is_identically_zero(&self) -> bool {
        self.face_values.iter().all(|v| v.norm() == 0.0)
    }
}

/// The standard 12-member family: a constant, three polynomial traces, four
/// atoms and four random bump sets.
pub fn standard_family(domain: &DiscreteDomain, seed: u64) -> Vec<DataFamily> {
    let mut fam = vec![DataFamily::constant(1.0)];
    let polys = if domain.dim() == 3 {
        [Polynomial::X, Polynomial::Xy, Polynomial::Z]
    } else {
        [Polynomial::X, Polynomial::Xy, Polynomial::X2MinusY2]
    };
    fam.extend(polys.iter().map(|&p| DataFamily::PolynomialTrace { polynomial: p }));
    let diam = domain.diameter();
    let faces = domain.faces();
    for k in 0..4 {
        let f = &faces[(k * faces.len()) / 4 + faces.len() / 8];
        fam.push(DataFamily::Atom {
            center: f.centroid[..domain.dim()].to_vec(),
            radius: diam / (4.0 * (1 << k) as f64),
        });
    }
    for k in 0..4u64 {
        fam.push(DataFamily::RandomBumps {
            seed: seed.wrapping_add(k),
            count: 3 + 2 * k as usize,
            scale: diam / 8.0,
        });
    }
    fam
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainPreset;

    fn square() -> DiscreteDomain {
        DiscreteDomain::build(&DomainPreset::Square { side: 1.0 }, 1.0 / 16.0).unwrap()
    }

    #[test]
    fn zero_on_vanishes_on_ball() {
        let d = square();
        let fam = DataFamily::ZeroOn {
            center: vec![0.5, 0.0],
            radius: 0.25,
            base: Box::new(DataFamily::constant(2.0)),
        };
        let data = BoundaryData::new(&d, &fam).unwrap();
        for (f, v) in d.faces().iter().zip(data.face_values()) {
            if point::dist(&f.centroid, &[0.5, 0.0, 0.0]) <= 0.25 {
                assert_eq!(*v, Complex64::new(0.0, 0.0));
            }
        }
        assert!(data.face_values().iter().any(|v| (v.re - 2.0).abs() < 1e-15));
    }

    #[test]
    fn bumps_are_seeded() {
        let d = square();
        let fam = DataFamily::RandomBumps { seed: 3, count: 4, scale: 0.2 };
        let a = BoundaryData::new(&d, &fam).unwrap();
        let b = BoundaryData::new(&d, &fam).unwrap();
        assert_eq!(a, b);
        let c = BoundaryData::new(&d, &DataFamily::RandomBumps { seed: 4, count: 4, scale: 0.2 })
            .unwrap();
        assert_ne!(a.face_values(), c.face_values());
    }

    #[test]
    fn standard_family_shape() {
        let d = square();
        let fam = standard_family(&d, 11);
        assert_eq!(fam.len(), 12);
        assert!(fam[0].is_constant());
        for f in &fam {
            BoundaryData::new(&d, f).unwrap();
        }
        let json = serde_json::to_string(&fam).unwrap();
        let back: Vec<DataFamily> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, fam);
    }

    #[test]
    fn polynomial_values() {
        assert_eq!(Polynomial::ReZ4.eval(&[1.0, 1.0, 0.0]), -4.0);
        assert_eq!(Polynomial::X2MinusY2.eval(&[2.0, 1.0, 0.0]), 3.0);
        assert!(Polynomial::from_name("x3").is_err());
    }
}
