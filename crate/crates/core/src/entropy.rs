//! Shannon entropy of window partitions, the free-group `F` quantity and its `f` sequence.
//!
//! Values are carried as an f64 in the requested unit together with, for exact inputs, a
//! [`LogForm`]. Equalities between exact entropies are decided on the forms, so `2 = 2`
//! holds with zero tolerance; only strict inequalities fall back to floating point.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::Zero;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::freegroup::GroupSpec;
use crate::logform::LogForm;
use crate::measures::{partition_distribution, MeasureSpec};
use crate::patterns::{
    alpha_join_over_ball, join, pn_partition, translate_partition, Alphabet, WindowPartition,
};
use crate::scalar::{format_rational, Scalar};

/// Tolerance, in bits, for comparisons that cannot be settled exactly.
pub const TOLERANCE_BITS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Unit {
    #[default]
    Bits,
    Nats,
}

impl Unit {
    fn from_bits(self, bits: f64) -> f64 {
        match self {
            Unit::Bits => bits,
            Unit::Nats => bits * std::f64::consts::LN_2,
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Unit::Bits => "bits",
            Unit::Nats => "nats",
        })
    }
}

impl FromStr for Unit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bits" => Ok(Unit::Bits),
            "nats" => Ok(Unit::Nats),
            other => Err(Error::InvalidParameter(format!("unknown unit {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyValue {
    value: f64,
    unit: Unit,
    form: Option<LogForm>,
}

impl EntropyValue {
    fn from_form(form: LogForm, unit: Unit) -> Self {
        EntropyValue {
            value: unit.from_bits(form.to_bits_f64()),
            unit,
            form: Some(form),
        }
    }

    pub fn zero(unit: Unit) -> Self {
        Self::from_form(LogForm::zero(), unit)
    }

    /// The value in `unit`.
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    /// The exact value as a rational in the chosen unit, when it is one. In nats only zero is
    /// rational.
    pub fn exact(&self) -> Option<BigRational> {
        let bits = self.form.as_ref()?.as_bits()?;
        match self.unit {
            Unit::Bits => Some(bits),
            Unit::Nats => bits.is_zero().then_some(bits),
        }
    }

    /// Exact symbolic value `Σ c_q log q`, present for exact inputs.
    pub fn form(&self) -> Option<&LogForm> {
        self.form.as_ref()
    }

    pub fn in_unit(&self, unit: Unit) -> Self {
        match &self.form {
            Some(f) => Self::from_form(f.clone(), unit),
            None => {
                let bits = match self.unit {
                    Unit::Bits => self.value,
                    Unit::Nats => self.value / std::f64::consts::LN_2,
                };
                EntropyValue {
                    value: unit.from_bits(bits),
                    unit,
                    form: None,
                }
            }
        }
    }

    fn combine(&self, other: &EntropyValue, sign: i64) -> EntropyValue {
        let other = other.in_unit(self.unit);
        let form = match (&self.form, &other.form) {
            (Some(a), Some(b)) => Some(if sign > 0 { a.add(b) } else { a.sub(b) }),
            _ => None,
        };
        match form {
            Some(f) => Self::from_form(f, self.unit),
            None => EntropyValue {
                value: self.value + sign as f64 * other.value,
                unit: self.unit,
                form: None,
            },
        }
    }

    pub fn add(&self, other: &EntropyValue) -> EntropyValue {
        self.combine(other, 1)
    }

    pub fn sub(&self, other: &EntropyValue) -> EntropyValue {
        self.combine(other, -1)
    }

    pub fn scale(&self, k: i64) -> EntropyValue {
        match &self.form {
            Some(f) => Self::from_form(f.scale(&BigRational::from_integer(k.into())), self.unit),
            None => EntropyValue {
                value: self.value * k as f64,
                unit: self.unit,
                form: None,
            },
        }
    }

    /// Exact when both sides carry forms; otherwise equality within [`TOLERANCE_BITS`].
    pub fn equals(&self, other: &EntropyValue) -> bool {
        self.compare(other) == Ordering::Equal
    }

    /// Equality is decided exactly when both values are exact; a nonzero exact difference is
    /// ordered by its floating sign.
    pub fn compare(&self, other: &EntropyValue) -> Ordering {
        let d = self.sub(other);
        if let Some(f) = &d.form {
            if f.is_zero() {
                return Ordering::Equal;
            }
            return f.to_bits_f64().partial_cmp(&0.0).unwrap_or(Ordering::Equal);
        }
        let bits = d.in_unit(Unit::Bits).value;
        if bits.abs() <= TOLERANCE_BITS {
            Ordering::Equal
        } else if bits < 0.0 {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }

    /// Exact rational when available, otherwise a 12-digit decimal.
    pub fn render(&self) -> String {
        match self.exact() {
            Some(q) => format_rational(&q),
            None => format!("{:.12}", self.value),
        }
    }
}

impl fmt::Display for EntropyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.render(), self.unit)
    }
}

/// `-Σ p log p`, with `0 log 0 = 0`.
pub fn shannon<S: Scalar>(dist: &[S], unit: Unit) -> Result<EntropyValue> {
    if dist.iter().any(|p| p.is_negative()) {
        return Err(Error::InvalidDistribution("negative probability".into()));
    }
    let total: S = dist.iter().cloned().sum();
    if !total.approx_eq(&S::one()) {
        return Err(Error::InvalidDistribution(format!("probabilities sum to {total}, not 1")));
    }
    if dist.first().and_then(|p| p.to_exact()).is_some() {
        let mut groups: BTreeMap<BigRational, u64> = BTreeMap::new();
        for p in dist {
            let p = p.to_exact().expect("exact scalar");
            if !p.is_zero() {
                *groups.entry(p).or_default() += 1;
            }
        }
        let mut form = LogForm::zero();
        let mut exact = true;
        for (p, count) in &groups {
            match LogForm::log_of(p) {
                Some(l) => form = form.sub(&l.scale(&(p * BigRational::from_integer((*count).into())))),
                None => {
                    exact = false;
                    break;
                }
            }
        }
        if exact {
            return Ok(EntropyValue::from_form(form, unit));
        }
        let bits: f64 = groups
            .iter()
            .map(|(p, c)| {
                let p = Scalar::to_f64(p);
                -(*c as f64) * p * p.log2()
            })
            .sum();
        return Ok(EntropyValue {
            value: unit.from_bits(bits),
            unit,
            form: None,
        });
    }
    let bits: f64 = dist
        .iter()
        .map(|p| p.to_f64())
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum();
    Ok(EntropyValue {
        value: unit.from_bits(bits),
        unit,
        form: None,
    })
}

/// `H(P)` under `mu`.
pub fn partition_entropy<S: Scalar>(
    mu: &MeasureSpec<S>,
    p: &WindowPartition,
    budget: Budget,
    unit: Unit,
) -> Result<EntropyValue> {
    shannon(&partition_distribution(mu, p, budget)?, unit)
}

/// `H(P | Q) = H(P ∨ Q) - H(Q)`.
pub fn cond_entropy<S: Scalar>(
    mu: &MeasureSpec<S>,
    p: &WindowPartition,
    q: &WindowPartition,
    budget: Budget,
    unit: Unit,
) -> Result<EntropyValue> {
    let joint = partition_entropy(mu, &join(p, q, budget)?, budget, unit)?;
    Ok(joint.sub(&partition_entropy(mu, q, budget, unit)?))
}

/// `F(P) = (1 - 2r) H(P) + Σ_i H(P ∨ s_i P)`.
pub fn f_quantity<S: Scalar>(
    mu: &MeasureSpec<S>,
    p: &WindowPartition,
    spec: &GroupSpec,
    budget: Budget,
    unit: Unit,
) -> Result<EntropyValue> {
    if !spec.is_group() {
        return Err(Error::UnsupportedMode("F is defined for free groups only".into()));
    }
    let r = spec.rank() as i64;
    let mut total = partition_entropy(mu, p, budget, unit)?.scale(1 - 2 * r);
    for s in spec.positive_generators() {
        let shifted = translate_partition(p, &spec.word(s), budget)?;
        total = total.add(&partition_entropy(mu, &join(p, &shifted, budget)?, budget, unit)?);
    }
    Ok(total)
}

/// `F(α^m)` for `m = 0..=n_max`. On budget exhaustion the error records how many terms were
/// completed.
pub fn f_sequence<S: Scalar>(
    mu: &MeasureSpec<S>,
    alpha: &WindowPartition,
    spec: &GroupSpec,
    n_max: usize,
    budget: Budget,
    unit: Unit,
) -> Result<Vec<EntropyValue>> {
    let mut out = Vec::new();
    for m in 0..=n_max {
        let term = alpha_join_over_ball(alpha, spec, m, budget)
            .and_then(|am| f_quantity(mu, &am, spec, budget, unit));
        match term {
            Ok(v) => out.push(v),
            Err(Error::BudgetExceeded { what, needed, limit, .. }) => {
                return Err(Error::BudgetExceeded {
                    what,
                    needed,
                    limit,
                    completed: Some(out.len()),
                })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleRow {
    pub n: usize,
    /// `H(P_n)`.
    pub h_pn: EntropyValue,
    /// `H(T⁻¹P_n ∨ P_n)`.
    pub h_join: EntropyValue,
    /// `H(P_n | T⁻¹P_n)`.
    pub h_cond: EntropyValue,
    /// `F(P_n)`.
    pub f_pn: EntropyValue,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleReport {
    pub rows: Vec<CounterexampleRow>,
    /// `F(α^m)` for `m = 0..=n_max`.
    pub f_sequence: Vec<EntropyValue>,
    /// The last two `f_sequence` terms agree exactly.
    pub stabilized: bool,
    /// Last term of the `f` sequence, reported as `f(α) = h(T)`.
    pub h: EntropyValue,
    /// Last row's `F(P_n)`, standing in for the `lim inf`.
    pub liminf_f: EntropyValue,
}

impl CounterexampleReport {
    /// `lim inf F(P_n)` and `f(α)` differ.
    pub fn refutes(&self) -> bool {
        !self.liminf_f.equals(&self.h)
    }

    pub fn verdict(&self) -> String {
        let rel = if self.refutes() { "≠" } else { "=" };
        format!(
            "liminf F(P_n) = {} {rel} {} = f(alpha)",
            self.liminf_f.render(),
            self.h.render()
        )
    }
}

/// The fair Bernoulli shift over `ℤ` with the partitions `P_n`, for `n = 1..=n_max`.
pub fn counterexample_report(n_max: usize, budget: Budget, unit: Unit) -> Result<CounterexampleReport> {
    if n_max < 1 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    let spec = GroupSpec::group(1)?;
    let mu = MeasureSpec::<BigRational>::uniform_bernoulli(2)?;
    let a_inv = spec.word(spec.letter(1, true)?);
    let mut rows = Vec::new();
    for n in 1..=n_max {
        let pn = pn_partition(n, budget)?;
        let shifted = translate_partition(&pn, &a_inv, budget)?;
        let h_pn = partition_entropy(&mu, &pn, budget, unit)?;
        let h_shifted = partition_entropy(&mu, &shifted, budget, unit)?;
        let h_join = partition_entropy(&mu, &join(&shifted, &pn, budget)?, budget, unit)?;
        let h_cond = h_join.sub(&h_shifted);
        let f_pn = f_quantity(&mu, &pn, &spec, budget, unit)?;
        if !h_cond.equals(&f_pn) {
            return Err(Error::Internal(format!(
                "H(P_{n} | T^-1 P_{n}) = {h_cond} differs from F(P_{n}) = {f_pn}"
            )));
        }
        rows.push(CounterexampleRow {
            n,
            h_pn,
            h_join,
            h_cond,
            f_pn,
        });
    }
    let alpha = WindowPartition::alpha(Alphabet::binary());
    let f_sequence = f_sequence(&mu, &alpha, &spec, n_max, budget, unit)?;
    let last = f_sequence.last().expect("n_max ≥ 1").clone();
    let stabilized = f_sequence.len() >= 2 && f_sequence[f_sequence.len() - 2].equals(&last);
    let liminf_f = rows.last().expect("n_max ≥ 1").f_pn.clone();
    Ok(CounterexampleReport {
        rows,
        f_sequence,
        stabilized,
        h: last,
        liminf_f,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freegroup::{SiteSet, Word};
    use crate::measures::TransitionSystem;

    type Q = BigRational;

    fn q(n: u64, d: u64) -> Q {
        Q::ratio(n, d)
    }

    fn int(v: i64) -> Q {
        Q::from_integer(v.into())
    }

    fn bits(v: &EntropyValue) -> Q {
        v.exact().expect("exact value")
    }

    fn z() -> GroupSpec {
        GroupSpec::group(1).unwrap()
    }

    fn fair() -> MeasureSpec<Q> {
        MeasureSpec::uniform_bernoulli(2).unwrap()
    }

    fn b() -> Budget {
        Budget::default()
    }

    #[test]
    fn shannon_examples() {
        assert_eq!(bits(&shannon(&[q(1, 2), q(1, 2)], Unit::Bits).unwrap()), int(1));
        assert_eq!(bits(&shannon(&[q(1, 1), q(0, 1)], Unit::Bits).unwrap()), int(0));
        assert_eq!(bits(&shannon(&vec![q(1, 16); 16], Unit::Bits).unwrap()), int(4));
        assert_eq!(bits(&shannon(&[q(1, 2), q(1, 4), q(1, 4)], Unit::Bits).unwrap()), q(3, 2));
        let third = shannon(&[q(1, 3), q(1, 3), q(1, 3)], Unit::Bits).unwrap();
        assert!(third.exact().is_none());
        assert!((third.value() - 3f64.log2()).abs() < 1e-12);
        let nats = shannon(&[q(1, 2), q(1, 2)], Unit::Nats).unwrap();
        assert!((nats.value() - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(nats.exact().is_none());
        assert_eq!(shannon(&[q(1, 1)], Unit::Nats).unwrap().exact(), Some(int(0)));
        assert!(matches!(shannon(&[q(1, 2), q(1, 4)], Unit::Bits), Err(Error::InvalidDistribution(_))));
        assert!(matches!(
            shannon(&[q(3, 2), Q::zero() - q(1, 2)], Unit::Bits),
            Err(Error::InvalidDistribution(_))
        ));
        let f = shannon(&[0.25f64, 0.75], Unit::Bits).unwrap();
        let e = shannon(&[q(1, 4), q(3, 4)], Unit::Bits).unwrap();
        assert!((f.value() - e.value()).abs() < 1e-12);
        assert!(f.equals(&e));
    }

    #[test]
    fn exact_equality_across_primes() {
        // H(1/3, 2/3) = log 3 - 2/3 bits.
        let h = shannon(&[q(1, 3), q(2, 3)], Unit::Bits).unwrap();
        let log3 = EntropyValue::from_form(LogForm::log_of(&int(3)).unwrap(), Unit::Bits);
        let two_thirds = EntropyValue::from_form(LogForm::bits(q(2, 3)), Unit::Bits);
        assert!(h.equals(&log3.sub(&two_thirds)));
        assert_eq!(h.compare(&log3), Ordering::Less);
    }

    #[test]
    fn partition_entropy_examples() {
        let mu = fair();
        let alpha = WindowPartition::alpha(Alphabet::binary());
        assert_eq!(bits(&partition_entropy(&mu, &alpha, b(), Unit::Bits).unwrap()), int(1));
        let a_inv = Word::parse("A", &z()).unwrap();
        for n in 1..=5 {
            let pn = pn_partition(n, b()).unwrap();
            assert_eq!(bits(&partition_entropy(&mu, &pn, b(), Unit::Bits).unwrap()), int(2 * n as i64));
            let t = translate_partition(&pn, &a_inv, b()).unwrap();
            assert_eq!(bits(&partition_entropy(&mu, &t, b(), Unit::Bits).unwrap()), int(2 * n as i64));
            let j = join(&t, &pn, b()).unwrap();
            assert_eq!(bits(&partition_entropy(&mu, &j, b(), Unit::Bits).unwrap()), int(2 * n as i64 + 2));
            assert_eq!(bits(&cond_entropy(&mu, &pn, &t, b(), Unit::Bits).unwrap()), int(2));
        }
    }

    #[test]
    fn conditional_examples() {
        let mu = fair();
        let alpha = WindowPartition::alpha(Alphabet::binary());
        let pn = pn_partition(2, b()).unwrap();
        for p in [&alpha, &pn] {
            assert_eq!(bits(&cond_entropy(&mu, p, p, b(), Unit::Bits).unwrap()), int(0));
        }
        let ta = translate_partition(&alpha, &Word::parse("a", &z()).unwrap(), b()).unwrap();
        assert_eq!(bits(&cond_entropy(&mu, &alpha, &ta, b(), Unit::Bits).unwrap()), int(1));
    }

    #[test]
    fn f_quantity_examples() {
        let alpha = WindowPartition::alpha(Alphabet::binary());
        assert_eq!(bits(&f_quantity(&fair(), &alpha, &z(), b(), Unit::Bits).unwrap()), int(1));
        let a_inv = Word::parse("A", &z()).unwrap();
        for n in 1..=4 {
            let pn = pn_partition(n, b()).unwrap();
            let f = f_quantity(&fair(), &pn, &z(), b(), Unit::Bits).unwrap();
            let t = translate_partition(&pn, &a_inv, b()).unwrap();
            assert_eq!(bits(&f), int(2));
            assert!(f.equals(&cond_entropy(&fair(), &pn, &t, b(), Unit::Bits).unwrap()));
        }
        let spec = GroupSpec::group(2).unwrap();
        let mu = MeasureSpec::bernoulli(vec![q(1, 4), q(3, 4)]).unwrap();
        let f = f_quantity(&mu, &alpha, &spec, b(), Unit::Bits).unwrap();
        let h = shannon(&[q(1, 4), q(3, 4)], Unit::Bits).unwrap();
        assert!(f.equals(&h));
        assert!(f.exact().is_none());
        let semi = GroupSpec::semigroup(1).unwrap();
        assert!(matches!(f_quantity(&mu, &alpha, &semi, b(), Unit::Bits), Err(Error::UnsupportedMode(_))));
    }

    #[test]
    fn f_sequence_examples() {
        let alpha = WindowPartition::alpha(Alphabet::binary());
        for v in f_sequence(&fair(), &alpha, &z(), 5, b(), Unit::Bits).unwrap() {
            assert_eq!(bits(&v), int(1));
        }
        let det = MeasureSpec::<Q>::deterministic_chain(2, &z()).unwrap();
        for v in f_sequence(&det, &alpha, &z(), 4, b(), Unit::Bits).unwrap() {
            assert_eq!(bits(&v), int(0));
        }
        let spec = GroupSpec::group(2).unwrap();
        let seq = f_sequence(&fair(), &alpha, &spec, 1, b(), Unit::Bits).unwrap();
        assert_eq!(seq.iter().map(bits).collect::<Vec<_>>(), vec![int(1), int(1)]);
        let err = f_sequence(&fair(), &alpha, &z(), 12, Budget::new(1 << 12).unwrap(), Unit::Bits);
        assert!(matches!(err, Err(Error::BudgetExceeded { completed: Some(c), .. }) if c > 0));
        let wide = WindowPartition::full(SiteSet::new([Word::identity(), Word::parse("a", &z()).unwrap()]), Alphabet::binary(), b()).unwrap();
        assert!(f_sequence(&fair(), &wide, &z(), 1, b(), Unit::Bits).is_err());
    }

    #[test]
    fn markov_entropy_rate() {
        // For a stationary chain on ℤ, F(α^m) equals the entropy rate Σ π_i H(P_i·) for m ≥ 0.
        let spec = z();
        let a = spec.letter(1, false).unwrap();
        let p = vec![vec![q(1, 2), q(1, 2)], vec![q(1, 4), q(3, 4)]];
        let ts = TransitionSystem::from_dense(vec![q(1, 3), q(2, 3)], vec![(a, p.clone()), (a.inverse(), p)]).unwrap();
        let mu = MeasureSpec::tree_markov(ts, &spec).unwrap();
        let row1 = shannon(&[q(1, 2), q(1, 2)], Unit::Bits).unwrap();
        let row2 = shannon(&[q(1, 4), q(3, 4)], Unit::Bits).unwrap();
        let expected = EntropyValue::from_form(
            row1.form().unwrap().scale(&q(1, 3)).add(&row2.form().unwrap().scale(&q(2, 3))),
            Unit::Bits,
        );
        let alpha = WindowPartition::alpha(Alphabet::binary());
        for v in f_sequence(&mu, &alpha, &spec, 3, b(), Unit::Bits).unwrap() {
            assert!(v.equals(&expected), "{v} vs {expected}");
        }
    }

    #[test]
    fn counterexample_rows() {
        let rep = counterexample_report(3, b(), Unit::Bits).unwrap();
        let rows: Vec<_> = rep
            .rows
            .iter()
            .map(|r| (r.n, bits(&r.h_pn), bits(&r.h_join), bits(&r.h_cond), bits(&r.f_pn)))
            .collect();
        assert_eq!(
            rows,
            vec![
                (1, int(2), int(4), int(2), int(2)),
                (2, int(4), int(6), int(2), int(2)),
                (3, int(6), int(8), int(2), int(2)),
            ]
        );
        assert_eq!(rep.f_sequence.len(), 4);
        assert!(rep.stabilized);
        assert_eq!(bits(&rep.h), int(1));
        assert!(rep.refutes());
        assert_eq!(rep.verdict(), "liminf F(P_n) = 2 ≠ 1 = f(alpha)");
    }

    #[test]
    fn nats_rendering() {
        let rep = counterexample_report(1, b(), Unit::Nats).unwrap();
        let v = &rep.rows[0].h_cond;
        assert!((v.value() - 2.0 * std::f64::consts::LN_2).abs() < 1e-12);
        assert_eq!(v.render(), format!("{:.12}", 2.0 * std::f64::consts::LN_2));
        assert!(rep.refutes());
    }
}
