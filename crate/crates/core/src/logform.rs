//! Exact rational combinations of logarithms of primes.
//!
//! Entropies of rational distributions are finite sums `Σ c_q · log q` with rational
//! coefficients over primes `q`. The logarithms of distinct primes are linearly independent
//! over the rationals, so two such values are equal iff their coefficient maps coincide.
//! A value is a rational number of bits iff only `q = 2` appears.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::scalar::format_rational;

const TRIAL_LIMIT: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LogForm {
    coeffs: BTreeMap<u64, BigRational>,
}

/// Prime factorization for numbers whose prime factors are all found by trial division up
/// to 2^20, or whose single leftover cofactor is below 2^40 (hence prime).
fn factor(n: &BigUint) -> Option<Vec<(u64, i64)>> {
    let mut rest = n.clone();
    let mut out = Vec::new();
    let mut d: u64 = 2;
    while d < TRIAL_LIMIT {
        let dd = BigUint::from(d);
        if &dd * &dd > rest {
            break;
        }
        let mut e = 0;
        while (&rest % &dd).is_zero() {
            rest /= &dd;
            e += 1;
        }
        if e > 0 {
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if !rest.is_one() {
        let r = rest.to_u64()?;
        let proven_prime = d >= TRIAL_LIMIT && r < TRIAL_LIMIT * TRIAL_LIMIT || (d as u128) * (d as u128) > r as u128;
        if !proven_prime {
            return None;
        }
        out.push((r, 1));
    }
    Some(out)
}

impl LogForm {
    pub fn zero() -> Self {
        LogForm::default()
    }

    /// `c · log 2`, i.e. `c` bits.
    pub fn bits(c: BigRational) -> Self {
        let mut f = LogForm::zero();
        f.add_term(2, c);
        f
    }

    /// `log r` for a positive rational `r`; `None` if `r ≤ 0` or a factor is out of reach.
    pub fn log_of(r: &BigRational) -> Option<Self> {
        if !r.is_positive() {
            return None;
        }
        let num = r.numer().to_biguint()?;
        let den = r.denom().to_biguint()?;
        let mut f = LogForm::zero();
        for (p, e) in factor(&num)? {
            f.add_term(p, BigRational::from_integer(e.into()));
        }
        for (p, e) in factor(&den)? {
            f.add_term(p, BigRational::from_integer((-e).into()));
        }
        Some(f)
    }

    fn add_term(&mut self, prime: u64, c: BigRational) {
        let slot = self.coeffs.entry(prime).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.coeffs.remove(&prime);
        }
    }

    pub fn add(&self, other: &LogForm) -> LogForm {
        let mut out = self.clone();
        for (p, c) in &other.coeffs {
            out.add_term(*p, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &LogForm) -> LogForm {
        self.add(&other.scale(&-BigRational::one()))
    }

    pub fn scale(&self, k: &BigRational) -> LogForm {
        if k.is_zero() {
            return LogForm::zero();
        }
        LogForm {
            coeffs: self
                .coeffs
                .iter()
                .map(|(p, c)| (*p, c * k))
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// The value in bits, if it is rational.
    pub fn as_bits(&self) -> Option<BigRational> {
        match self.coeffs.len() {
            0 => Some(BigRational::zero()),
            1 => self.coeffs.get(&2).cloned(),
            _ => None,
        }
    }

    pub fn to_bits_f64(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|(p, c)| c.to_f64().unwrap_or(f64::NAN) * (*p as f64).log2())
            .sum()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, &BigRational)> {
        self.coeffs.iter().map(|(p, c)| (*p, c))
    }
}

impl fmt::Display for LogForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (i, (p, c)) in self.coeffs.iter().enumerate() {
            let sign = if c.is_negative() { "-" } else if i > 0 { "+" } else { "" };
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{sign}{}·log({p})", format_rational(&c.abs()))?;
        }
        Ok(())
    }
}
