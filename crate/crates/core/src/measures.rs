//! Shift-invariant measures on `K^G` given at desk scale: Bernoulli products and
//! tree-indexed Markov measures.
//!
//! A tree-indexed Markov measure is defined by a [`TransitionSystem`]: the symbol at `e` is
//! drawn from `pi`, and along every geodesic edge `g' → t·g'` the symbol moves by `P^t`.
//! Marginals on a domain `D` are computed exactly on the suffix hull of `D ∪ {e}`, the
//! smallest subtree containing both, summing over the free sites.

use std::collections::BTreeMap;
use std::fmt;

use crate::budget::{Budget, Meter};
use crate::error::{Error, Result};
use crate::freegroup::{GroupSpec, Letter, SiteSet, Word};
use crate::patterns::{index_of, Alphabet, Pattern, Projection, WindowPartition};
use crate::scalar::Scalar;

/// Row-sparse square matrix; each row holds `(column, value)` pairs sorted by column, with
/// zero entries omitted.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<S> {
    rows: Vec<Vec<(u32, S)>>,
}

impl<S: Scalar> SparseMatrix<S> {
    pub fn from_rows(dim: usize, rows: Vec<Vec<(u32, S)>>) -> Result<Self> {
        if rows.len() != dim {
            return Err(Error::Malformed(format!(
                "matrix has {} rows, expected {dim}",
                rows.len()
            )));
        }
        let mut clean = Vec::with_capacity(dim);
        for mut row in rows {
            row.retain(|(_, v)| !v.is_zero());
            row.sort_by_key(|e| e.0);
            if row.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::Malformed("duplicate column in sparse row".into()));
            }
            if row.iter().any(|&(j, _)| j as usize >= dim) {
                return Err(Error::Malformed("column index out of range".into()));
            }
            clean.push(row);
        }
        Ok(SparseMatrix { rows: clean })
    }

    pub fn from_dense(dense: Vec<Vec<S>>) -> Result<Self> {
        let dim = dense.len();
        if let Some(bad) = dense.iter().find(|r| r.len() != dim) {
            return Err(Error::Malformed(format!(
                "matrix row has {} entries, expected {dim}",
                bad.len()
            )));
        }
        let rows = dense
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .enumerate()
                    .map(|(j, v)| (j as u32, v))
                    .collect()
            })
            .collect();
        Self::from_rows(dim, rows)
    }

    pub fn identity(dim: usize) -> Self {
        SparseMatrix {
            rows: (0..dim).map(|i| vec![(i as u32, S::one())]).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[(u32, S)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        let row = &self.rows[i];
        match row.binary_search_by_key(&(j as u32), |e| e.0) {
            Ok(p) => row[p].1.clone(),
            Err(_) => S::zero(),
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<S>> {
        let n = self.dim();
        self.rows
            .iter()
            .map(|row| {
                let mut d = vec![S::zero(); n];
                for (j, v) in row {
                    d[*j as usize] = v.clone();
                }
                d
            })
            .collect()
    }

    pub fn nonzeros(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }
}

/// Vertex distribution `pi` and one stochastic matrix `P^s` per generator `s ∈ S`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionSystem<S> {
    pi: Vec<S>,
    matrices: BTreeMap<Letter, SparseMatrix<S>>,
}

impl<S: Scalar> TransitionSystem<S> {
    pub fn new(pi: Vec<S>, matrices: BTreeMap<Letter, SparseMatrix<S>>) -> Result<Self> {
        if pi.is_empty() {
            return Err(Error::Malformed("transition system has no states".into()));
        }
        for (s, m) in &matrices {
            if m.dim() != pi.len() {
                return Err(Error::Malformed(format!(
                    "matrix for {s} has dimension {}, expected {}",
                    m.dim(),
                    pi.len()
                )));
            }
        }
        Ok(TransitionSystem { pi, matrices })
    }

    pub fn from_dense(pi: Vec<S>, matrices: Vec<(Letter, Vec<Vec<S>>)>) -> Result<Self> {
        let m = matrices
            .into_iter()
            .map(|(l, d)| Ok((l, SparseMatrix::from_dense(d)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        Self::new(pi, m)
    }

    pub fn states(&self) -> usize {
        self.pi.len()
    }

    pub fn alphabet(&self) -> Alphabet {
        Alphabet::new(self.pi.len()).expect("non-empty")
    }

    pub fn pi(&self) -> &[S] {
        &self.pi
    }

    pub fn matrices(&self) -> &BTreeMap<Letter, SparseMatrix<S>> {
        &self.matrices
    }

    pub fn matrix(&self, s: Letter) -> Result<&SparseMatrix<S>> {
        self.matrices
            .get(&s)
            .ok_or_else(|| Error::Malformed(format!("no transition matrix for generator {s}")))
    }

    /// Checks stochasticity, stationarity and, in group mode, reversibility.
    pub fn validate(&self, spec: &GroupSpec) -> Result<ValidationReport> {
        validate(self, spec)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Check {
    Pass,
    Fail(String),
}

impl Check {
    pub fn passed(&self) -> bool {
        matches!(self, Check::Pass)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Check::Pass => write!(f, "pass"),
            Check::Fail(why) => write!(f, "fail: {why}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub stochastic: Check,
    pub stationary: Check,
    /// `None` in semigroup mode.
    pub reversible: Option<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.stochastic.passed()
            && self.stationary.passed()
            && self.reversible.as_ref().is_none_or(Check::passed)
    }
}

pub fn validate<S: Scalar>(ts: &TransitionSystem<S>, spec: &GroupSpec) -> Result<ValidationReport> {
    let gens = spec.generators();
    for s in &gens {
        ts.matrix(*s)?;
    }
    if let Some(extra) = ts.matrices.keys().find(|l| !gens.contains(l)) {
        return Err(Error::Malformed(format!(
            "matrix for {extra}, which is not a generator of the {} of rank {}",
            spec.mode(),
            spec.rank()
        )));
    }
    let n = ts.states();

    let stochastic = 'st: {
        if let Some(i) = ts.pi.iter().position(|p| p.is_negative()) {
            break 'st Check::Fail(format!("pi[{i}] is negative"));
        }
        let total: S = ts.pi.iter().cloned().sum();
        if !total.approx_eq(&S::one()) {
            break 'st Check::Fail(format!("pi sums to {total}"));
        }
        for s in &gens {
            let m = &ts.matrices[s];
            for i in 0..n {
                if let Some((j, _)) = m.row(i).iter().find(|(_, v)| v.is_negative()) {
                    break 'st Check::Fail(format!("P^{s}[{i}][{j}] is negative"));
                }
                let sum: S = m.row(i).iter().map(|(_, v)| v.clone()).sum();
                if !sum.approx_eq(&S::one()) {
                    break 'st Check::Fail(format!("row {i} of P^{s} sums to {sum}"));
                }
            }
        }
        Check::Pass
    };

    let stationary = 'st: {
        for s in &gens {
            let m = &ts.matrices[s];
            let mut out = vec![S::zero(); n];
            for i in 0..n {
                if ts.pi[i].is_zero() {
                    continue;
                }
                for (j, v) in m.row(i) {
                    out[*j as usize] = out[*j as usize].clone() + ts.pi[i].clone() * v.clone();
                }
            }
            if let Some(j) = (0..n).find(|&j| !out[j].approx_eq(&ts.pi[j])) {
                break 'st Check::Fail(format!(
                    "(pi·P^{s})[{j}] = {} but pi[{j}] = {}",
                    out[j], ts.pi[j]
                ));
            }
        }
        Check::Pass
    };

    let reversible = spec.is_group().then(|| 'rv: {
        for s in &gens {
            let m = &ts.matrices[s];
            let inv = &ts.matrices[&s.inverse()];
            for i in 0..n {
                for (j, _) in m.row(i) {
                    let j = *j as usize;
                    let lhs = ts.pi[i].clone() * m.get(i, j);
                    let rhs = ts.pi[j].clone() * inv.get(j, i);
                    if !lhs.approx_eq(&rhs) {
                        break 'rv Check::Fail(format!(
                            "pi[{i}]·P^{s}[{i}][{j}] = {lhs} but pi[{j}]·P^{}[{j}][{i}] = {rhs}",
                            s.inverse()
                        ));
                    }
                }
            }
        }
        Check::Pass
    });

    Ok(ValidationReport {
        stochastic,
        stationary,
        reversible,
    })
}

/// A shift-invariant measure on `K^G`.
#[derive(Debug, Clone, PartialEq)]
pub enum MeasureSpec<S> {
    /// i.i.d. symbols with the given base distribution.
    Bernoulli(Vec<S>),
    TreeMarkov(TransitionSystem<S>),
}

impl<S: Scalar> MeasureSpec<S> {
    pub fn bernoulli(p: Vec<S>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidMeasure("empty base distribution".into()));
        }
        if p.iter().any(|x| x.is_negative()) {
            return Err(Error::InvalidMeasure("negative base probability".into()));
        }
        let total: S = p.iter().cloned().sum();
        if !total.approx_eq(&S::one()) {
            return Err(Error::InvalidMeasure(format!("base distribution sums to {total}")));
        }
        Ok(MeasureSpec::Bernoulli(p))
    }

    pub fn uniform_bernoulli(k: usize) -> Result<Self> {
        Self::bernoulli(vec![S::ratio(1, k as u64); k])
    }

    /// A tree-Markov measure; rejected unless the system validates for `spec`.
    pub fn tree_markov(ts: TransitionSystem<S>, spec: &GroupSpec) -> Result<Self> {
        let report = validate(&ts, spec)?;
        if !report.passed() {
            return Err(Error::InvalidMeasure(format!(
                "transition system is not invariant: stochastic {}, stationary {}, reversible {}",
                report.stochastic,
                report.stationary,
                report.reversible.map_or("n/a".to_string(), |c| c.to_string())
            )));
        }
        Ok(MeasureSpec::TreeMarkov(ts))
    }

    /// `pi` uniform and every `P^s` the identity: configurations are constant.
    pub fn deterministic_chain(k: usize, spec: &GroupSpec) -> Result<Self> {
        let ts = TransitionSystem::new(
            vec![S::ratio(1, k as u64); k],
            spec.generators()
                .into_iter()
                .map(|s| (s, SparseMatrix::identity(k)))
                .collect(),
        )?;
        Self::tree_markov(ts, spec)
    }

    pub fn alphabet(&self) -> Alphabet {
        match self {
            MeasureSpec::Bernoulli(p) => Alphabet::new(p.len()).expect("non-empty"),
            MeasureSpec::TreeMarkov(ts) => ts.alphabet(),
        }
    }

    pub fn is_bernoulli(&self) -> bool {
        matches!(self, MeasureSpec::Bernoulli(_))
    }

    /// Checks that every generator appearing in `spec` has a matrix.
    pub fn check_against(&self, spec: &GroupSpec) -> Result<()> {
        if let MeasureSpec::TreeMarkov(ts) = self {
            let report = validate(ts, spec)?;
            if !report.passed() {
                return Err(Error::InvalidMeasure("transition system fails validation".into()));
            }
        }
        Ok(())
    }
}

/// Depth-first walk over assignments of `sites` with positive weight, multiplying weights
/// as it goes. `fixed[i]` pins a site's symbol. For tree-Markov measures `sites` must be
/// suffix-closed and contain `e`.
struct WeightedWalk<'a, S> {
    mu: &'a MeasureSpec<S>,
    /// Per site: `None` for the root or under Bernoulli, else `(parent index, matrix)`.
    links: Vec<Option<(usize, &'a SparseMatrix<S>)>>,
    fixed: Vec<Option<u32>>,
    values: Vec<u32>,
}

impl<'a, S: Scalar> WeightedWalk<'a, S> {
    fn new(mu: &'a MeasureSpec<S>, sites: &SiteSet, fixed: Vec<Option<u32>>) -> Result<Self> {
        let links = match mu {
            MeasureSpec::Bernoulli(_) => vec![None; sites.len()],
            MeasureSpec::TreeMarkov(ts) => {
                let mut links = Vec::with_capacity(sites.len());
                for w in sites.iter() {
                    match w.split_first() {
                        None => links.push(None),
                        Some((t, rest)) => {
                            let p = sites.index_of(&rest).ok_or_else(|| {
                                Error::Internal(format!("site set not suffix-closed at {w}"))
                            })?;
                            links.push(Some((p, ts.matrix(t)?)));
                        }
                    }
                }
                if !sites.contains(&Word::identity()) {
                    return Err(Error::Internal("tree walk without a root".into()));
                }
                links
            }
        };
        let n = sites.len();
        Ok(WeightedWalk {
            mu,
            links,
            fixed,
            values: vec![0; n],
        })
    }

    /// Calls `leaf(values, weight)` for each full assignment of positive weight, in canonical
    /// order.
    fn run(&mut self, meter: &mut Meter, leaf: &mut dyn FnMut(&[u32], &S)) -> Result<()> {
        self.step(0, &S::one(), meter, leaf)
    }

    fn step(
        &mut self,
        pos: usize,
        acc: &S,
        meter: &mut Meter,
        leaf: &mut dyn FnMut(&[u32], &S),
    ) -> Result<()> {
        if pos == self.values.len() {
            leaf(&self.values, acc);
            return Ok(());
        }
        meter.tick()?;
        let candidates: Vec<(u32, S)> = match (self.mu, self.links[pos]) {
            (MeasureSpec::Bernoulli(p), _) => p
                .iter()
                .enumerate()
                .map(|(v, w)| (v as u32, w.clone()))
                .collect(),
            (MeasureSpec::TreeMarkov(ts), None) => ts
                .pi
                .iter()
                .enumerate()
                .map(|(v, w)| (v as u32, w.clone()))
                .collect(),
            (MeasureSpec::TreeMarkov(_), Some((parent, m))) => {
                m.row(self.values[parent] as usize).to_vec()
            }
        };
        for (v, w) in candidates {
            if let Some(f) = self.fixed[pos] {
                if f != v {
                    continue;
                }
            }
            if !w.is_positive() {
                continue;
            }
            self.values[pos] = v;
            let next = acc.clone() * w;
            self.step(pos + 1, &next, meter, leaf)?;
        }
        Ok(())
    }
}

fn walk_sites<S: Scalar>(mu: &MeasureSpec<S>, domain: &SiteSet) -> SiteSet {
    match mu {
        MeasureSpec::Bernoulli(_) => domain.clone(),
        MeasureSpec::TreeMarkov(_) => domain.suffix_hull(),
    }
}

fn check_symbols<S: Scalar>(mu: &MeasureSpec<S>, p: &Pattern) -> Result<()> {
    let k = mu.alphabet().size();
    if p.values().iter().any(|&v| v as usize >= k) {
        return Err(Error::Malformed(format!(
            "pattern symbol outside the measure's alphabet of size {k}"
        )));
    }
    Ok(())
}

/// `mu` of the cylinder set fixed by `p`.
pub fn marginal<S: Scalar>(mu: &MeasureSpec<S>, p: &Pattern, budget: Budget) -> Result<S> {
    check_symbols(mu, p)?;
    if let MeasureSpec::Bernoulli(base) = mu {
        return Ok(p
            .values()
            .iter()
            .fold(S::one(), |acc, &v| acc * base[v as usize].clone()));
    }
    let sites = walk_sites(mu, p.domain());
    let fixed: Vec<Option<u32>> = sites.iter().map(|w| p.get(w)).collect();
    let free = sites.len() - p.domain().len();
    budget.power(mu.alphabet().size(), free, "summing extensions for a marginal")?;
    let mut walk = WeightedWalk::new(mu, &sites, fixed)?;
    let mut total = S::zero();
    let mut meter = Meter::new(Budget::unlimited(), "summing extensions for a marginal");
    walk.run(&mut meter, &mut |_, w| total = total.clone() + w.clone())?;
    Ok(total)
}

/// Whether the cylinder of `p` has positive measure.
pub fn is_positive<S: Scalar>(mu: &MeasureSpec<S>, p: &Pattern, budget: Budget) -> Result<bool> {
    check_symbols(mu, p)?;
    match mu {
        MeasureSpec::Bernoulli(base) => Ok(p.values().iter().all(|&v| base[v as usize].is_positive())),
        MeasureSpec::TreeMarkov(_) => Ok(marginal(mu, p, budget)?.is_positive()),
    }
}

/// Marginals of every pattern on `window`, indexed canonically.
pub fn window_distribution<S: Scalar>(
    mu: &MeasureSpec<S>,
    window: &SiteSet,
    budget: Budget,
) -> Result<Vec<S>> {
    let k = mu.alphabet().size();
    let size = budget.power(k, window.len(), "computing a window distribution")?;
    let sites = walk_sites(mu, window);
    let proj = Projection::restriction(&sites, window, k).expect("window inside its hull");
    let mut dist = vec![S::zero(); size as usize];
    let mut walk = WeightedWalk::new(mu, &sites, vec![None; sites.len()])?;
    let mut meter = Meter::new(budget, "computing a window distribution");
    if sites.len() == window.len() {
        walk.run(&mut meter, &mut |vals, w| {
            dist[index_of(vals, k) as usize] = w.clone();
        })?;
    } else {
        walk.run(&mut meter, &mut |vals, w| {
            let i = proj.apply(vals) as usize;
            dist[i] = dist[i].clone() + w.clone();
        })?;
    }
    Ok(dist)
}

/// Weighted walk over the positive-weight patterns of `sites`, calling `visit` for each.
pub(crate) fn for_each_positive<S: Scalar>(
    mu: &MeasureSpec<S>,
    sites: &SiteSet,
    budget: Budget,
    what: &'static str,
    mut visit: impl FnMut(&[u32], &S),
) -> Result<()> {
    let mut walk = WeightedWalk::new(mu, sites, vec![None; sites.len()])?;
    let mut meter = Meter::new(budget, what);
    walk.run(&mut meter, &mut |v, w| visit(v, w))
}

/// Distribution of the labels of `partition` under `mu`.
pub fn partition_distribution<S: Scalar>(
    mu: &MeasureSpec<S>,
    partition: &WindowPartition,
    budget: Budget,
) -> Result<Vec<S>> {
    if partition.alphabet() != mu.alphabet() {
        return Err(Error::InvalidParameter(
            "partition and measure use different alphabets".into(),
        ));
    }
    let window = window_distribution(mu, partition.window(), budget)?;
    let mut out = vec![S::zero(); partition.label_count()];
    for (w, &l) in window.into_iter().zip(partition.labeling()) {
        if !w.is_zero() {
            out[l as usize] = out[l as usize].clone() + w;
        }
    }
    Ok(out)
}

/// Number of patterns on a suffix-closed `sites` (containing `e`) with positive measure.
/// Computed by a leaves-to-root count, independent of any enumeration.
pub fn support_count<S: Scalar>(mu: &MeasureSpec<S>, sites: &SiteSet) -> Result<u128> {
    let overflow = || Error::Internal("support count overflows u128".into());
    match mu {
        MeasureSpec::Bernoulli(base) => {
            let s = base.iter().filter(|p| p.is_positive()).count() as u128;
            (0..sites.len()).try_fold(1u128, |acc, _| acc.checked_mul(s).ok_or_else(overflow))
        }
        MeasureSpec::TreeMarkov(ts) => positive_tree_count(ts, sites),
    }
}

/// Number of assignments of a suffix-closed `sites` (containing `e`) that put a state with
/// positive `pi` at `e` and use only positive transitions along geodesic edges.
pub(crate) fn positive_tree_count<S: Scalar>(ts: &TransitionSystem<S>, sites: &SiteSet) -> Result<u128> {
    let overflow = || Error::Internal("support count overflows u128".into());
    if !sites.is_suffix_closed() || !sites.contains(&Word::identity()) {
        return Err(Error::MalformedBall(
            "support counting needs a suffix-closed set containing e".into(),
        ));
    }
    let n = ts.states();
    // counts[site][state]: positive completions of the subtree below `site`.
    let mut counts = vec![vec![1u128; n]; sites.len()];
    for (c, w) in sites.iter().enumerate().rev() {
        let Some((t, rest)) = w.split_first() else {
            continue;
        };
        let p = sites.index_of(&rest).expect("suffix-closed");
        let m = ts.matrix(t)?;
        for i in 0..n {
            let mut sum = 0u128;
            for (j, v) in m.row(i) {
                if v.is_positive() {
                    sum = sum.checked_add(counts[c][*j as usize]).ok_or_else(overflow)?;
                }
            }
            counts[p][i] = counts[p][i].checked_mul(sum).ok_or_else(overflow)?;
        }
    }
    let mut total = 0u128;
    for (i, p) in ts.pi.iter().enumerate() {
        if p.is_positive() {
            total = total.checked_add(counts[0][i]).ok_or_else(overflow)?;
        }
    }
    Ok(total)
}
