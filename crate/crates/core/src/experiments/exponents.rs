//! Exact exponent bookkeeping for the fractional-integral step.

use num_rational::Rational64;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExponentBook {
    pub n: i64,
    pub s: (i64, i64),
    /// `r` from `1/r = 1/2 − 1/(2(n−1))`.
    pub r: (i64, i64),
    /// `p = r s / 2`.
    pub p: (i64, i64),
}

fn pair(x: Rational64) -> (i64, i64) {
    (*x.numer(), *x.denom())
}

/// Computes `r` and `p = rs/2` as rationals and checks
/// `p = s(n−1)/(n−2)`. Fails for `n = 2`, where `1/r = 0`.
pub fn fractional_exponents(s: Rational64, n: i64) -> Result<ExponentBook> {
    if n < 3 {
        return Err(Error::Domain(format!("1/r vanishes for n = {n}; r is infinite")));
    }
    let half = Rational64::new(1, 2);
    let inv_r = half - Rational64::new(1, 2 * (n - 1));
    let r = inv_r.recip();
    let p = r * s * half;
    let expected = s * Rational64::from_integer(n - 1) / Rational64::from_integer(n - 2);
    if p != expected {
        return Err(Error::Invariant(format!("p = {p} differs from s(n−1)/(n−2) = {expected}")));
    }
    Ok(ExponentBook {
        n,
        s: pair(s),
        r: pair(r),
        p: pair(p),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_holds_exactly() {
        for n in 3..12 {
            for (a, b) in [(2, 1), (7, 3), (13, 5), (1, 1)] {
                let book = fractional_exponents(Rational64::new(a, b), n).unwrap();
                assert_eq!(book.r, pair(Rational64::new(2 * (n - 1), n - 2)));
            }
        }
        assert_eq!(fractional_exponents(Rational64::new(2, 1), 3).unwrap().p, (4, 1));
        assert!(fractional_exponents(Rational64::new(2, 1), 2).is_err());
    }
}
