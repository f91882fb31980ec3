//! Probability scalars.
//!
//! Every measure, transition system and distribution in this crate is generic over a
//! [`Scalar`]. [`BigRational`] gives exact results (support tests, stationarity and
//! reversibility identities, dyadic entropies); `f64` is available for quick numerics where
//! exactness is not needed.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

pub trait Scalar: Num + Clone + Debug + Display + PartialOrd + Sum + Send + Sync + 'static {
    /// Build `num / den`. `den` must be nonzero.
    fn ratio(num: u64, den: u64) -> Self;

    fn to_f64(&self) -> f64;

    /// The exact rational value, if this scalar type carries one.
    fn to_exact(&self) -> Option<BigRational>;

    /// Whether equality and zero tests on this type are exact.
    fn is_exact() -> bool;

    /// Equality up to the type's own notion of precision.
    fn approx_eq(&self, other: &Self) -> bool;

    fn is_negative(&self) -> bool {
        *self < Self::zero()
    }

    fn is_positive(&self) -> bool {
        *self > Self::zero()
    }
}

impl Scalar for BigRational {
    fn ratio(num: u64, den: u64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn to_exact(&self) -> Option<BigRational> {
        Some(self.clone())
    }

    fn is_exact() -> bool {
        true
    }

    fn approx_eq(&self, other: &Self) -> bool {
        self == other
    }

    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }

    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
}

const F64_TOLERANCE: f64 = 1e-12;

impl Scalar for f64 {
    fn ratio(num: u64, den: u64) -> Self {
        num as f64 / den as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn to_exact(&self) -> Option<BigRational> {
        None
    }

    fn is_exact() -> bool {
        false
    }

    fn approx_eq(&self, other: &Self) -> bool {
        (self - other).abs() <= F64_TOLERANCE * (1.0 + self.abs().max(other.abs()))
    }
}

/// Parse `"a/b"`, `"a"` or a decimal like `"0.25"` into a rational in lowest terms.
/// Rejects zero denominators and negative values.
pub fn parse_rational(text: &str) -> Result<BigRational, String> {
    let t = text.trim();
    let value = if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| format!("bad numerator in {text:?}"))?;
        let d: BigInt = d.trim().parse().map_err(|_| format!("bad denominator in {text:?}"))?;
        if d.is_zero() {
            return Err(format!("zero denominator in {text:?}"));
        }
        BigRational::new(n, d)
    } else if let Some((int, frac)) = t.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("bad decimal {text:?}"));
        }
        let digits: BigInt = format!("{int}{frac}")
            .parse()
            .map_err(|_| format!("bad decimal {text:?}"))?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        BigRational::new(digits, scale)
    } else {
        let n: BigInt = t.parse().map_err(|_| format!("bad rational {text:?}"))?;
        BigRational::from_integer(n)
    };
    if Signed::is_negative(&value) {
        return Err(format!("negative value {text:?}"));
    }
    Ok(value)
}

/// Render a rational as `a/b`, or `a` when the denominator is one.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_in_lowest_terms() {
        let r = parse_rational("2/4").unwrap();
        assert_eq!(format_rational(&r), "1/2");
        assert_eq!(format_rational(&parse_rational("3").unwrap()), "3");
        assert_eq!(format_rational(&parse_rational("0.25").unwrap()), "1/4");
    }

    #[test]
    fn rejects_bad_rationals() {
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("-1/2").is_err());
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1.").is_err());
    }

    #[test]
    fn float_scalar_is_inexact() {
        assert!(!<f64 as Scalar>::is_exact());
        assert!(0.1f64.to_exact().is_none());
        assert!(Scalar::approx_eq(&(0.1 + 0.2), &0.3));
    }
}
