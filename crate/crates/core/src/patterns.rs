//! Finite patterns on site sets, and finite partitions of `K^G` given by labelings of the
//! patterns on a window.
//!
//! Patterns on a domain `D = {d_0 < d_1 < …}` are indexed canonically as base-`|K|` numbers
//! with `d_0` the most significant digit.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::freegroup::{ball, GroupSpec, SiteSet, Word};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Alphabet(usize);

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidParameter("alphabet size must be at least 1".into()));
        }
        if size > u32::MAX as usize {
            return Err(Error::InvalidParameter(format!("alphabet size {size} is too large")));
        }
        Ok(Alphabet(size))
    }

    pub fn binary() -> Self {
        Alphabet(2)
    }

    pub fn size(&self) -> usize {
        self.0
    }
}

/// A configuration on a finite domain.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pattern {
    domain: SiteSet,
    values: Vec<u32>,
}

impl Pattern {
    pub fn new(domain: SiteSet, values: Vec<u32>, alphabet: Alphabet) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::Malformed(format!(
                "pattern has {} values for {} sites",
                values.len(),
                domain.len()
            )));
        }
        if let Some(v) = values.iter().find(|&&v| v as usize >= alphabet.size()) {
            return Err(Error::Malformed(format!(
                "symbol {v} outside alphabet of size {}",
                alphabet.size()
            )));
        }
        Ok(Pattern { domain, values })
    }

    pub(crate) fn from_parts(domain: SiteSet, values: Vec<u32>) -> Self {
        debug_assert_eq!(domain.len(), values.len());
        Pattern { domain, values }
    }

    /// Build from `(site, symbol)` pairs in any order.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Word, u32)>, alphabet: Alphabet) -> Result<Self> {
        let mut pairs: Vec<(Word, u32)> = pairs.into_iter().collect();
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Malformed("pattern assigns a site twice".into()));
        }
        let domain = SiteSet::new(pairs.iter().map(|p| p.0.clone()));
        let values = pairs.into_iter().map(|p| p.1).collect();
        Pattern::new(domain, values, alphabet)
    }

    /// The pattern with canonical index `index` on `domain`.
    pub fn from_index(domain: SiteSet, index: u64, alphabet: Alphabet) -> Self {
        let values = digits(index, domain.len(), alphabet.size());
        Pattern { domain, values }
    }

    pub fn domain(&self) -> &SiteSet {
        &self.domain
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn get(&self, site: &Word) -> Option<u32> {
        self.domain.index_of(site).map(|i| self.values[i])
    }

    pub fn index(&self, alphabet: Alphabet) -> u64 {
        index_of(&self.values, alphabet.size())
    }

    pub fn restrict(&self, sub: &SiteSet) -> Option<Pattern> {
        let values = sub
            .iter()
            .map(|w| self.get(w))
            .collect::<Option<Vec<_>>>()?;
        Some(Pattern {
            domain: sub.clone(),
            values,
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, u32)> + '_ {
        self.domain.iter().zip(self.values.iter().copied())
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (w, v)) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{w}:{v}")?;
        }
        write!(f, "}}")
    }
}

pub(crate) fn index_of(values: &[u32], k: usize) -> u64 {
    values.iter().fold(0u64, |acc, &v| acc * k as u64 + v as u64)
}

pub(crate) fn digits(mut index: u64, len: usize, k: usize) -> Vec<u32> {
    let mut out = vec![0u32; len];
    for slot in out.iter_mut().rev() {
        *slot = (index % k as u64) as u32;
        index /= k as u64;
    }
    out
}

/// Positional weights `k^{len-1-i}` of the canonical pattern index.
pub(crate) fn place_values(len: usize, k: usize) -> Vec<u64> {
    let mut w = vec![1u64; len];
    for i in (0..len.saturating_sub(1)).rev() {
        w[i] = w[i + 1] * k as u64;
    }
    w
}

/// Linear map from patterns on a source domain to the canonical index of an induced pattern
/// on a target domain: `target(t) = source(position[t])`.
#[derive(Debug, Clone)]
pub(crate) struct Projection {
    /// Weight carried by each source coordinate.
    pub weights: Vec<u64>,
}

impl Projection {
    /// `positions[t]` is the source coordinate feeding target coordinate `t`.
    pub fn new(source_len: usize, positions: &[usize], k: usize) -> Self {
        let pv = place_values(positions.len(), k);
        let mut weights = vec![0u64; source_len];
        for (t, &s) in positions.iter().enumerate() {
            weights[s] += pv[t];
        }
        Projection { weights }
    }

    /// Restriction from `source` to a subset `target`.
    pub fn restriction(source: &SiteSet, target: &SiteSet, k: usize) -> Option<Self> {
        let pos = target
            .iter()
            .map(|w| source.index_of(w))
            .collect::<Option<Vec<_>>>()?;
        Some(Projection::new(source.len(), &pos, k))
    }

    /// Reads the pattern `f ↦ x(f·g)` for `f` in `base` off a pattern `x` on `source`.
    pub fn translated(source: &SiteSet, base: &SiteSet, g: &Word, k: usize) -> Option<Self> {
        let pos = base
            .iter()
            .map(|f| source.index_of(&f.mul(g)))
            .collect::<Option<Vec<_>>>()?;
        Some(Projection::new(source.len(), &pos, k))
    }

    #[inline]
    pub fn apply(&self, values: &[u32]) -> u64 {
        self.weights
            .iter()
            .zip(values)
            .map(|(w, &v)| w * v as u64)
            .sum()
    }
}

/// Visits every pattern on `len` coordinates over `k` symbols in canonical order, keeping
/// each projection's index current incrementally.
pub(crate) fn for_each_assignment(
    len: usize,
    k: usize,
    projections: &[&Projection],
    mut visit: impl FnMut(u64, &[u32], &[u64]),
) {
    let mut values = vec![0u32; len];
    let mut proj = vec![0u64; projections.len()];
    let mut index = 0u64;
    loop {
        visit(index, &values, &proj);
        // increment least significant digit first
        let mut pos = len;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            if (values[pos] as usize) + 1 < k {
                values[pos] += 1;
                for (p, slot) in projections.iter().zip(proj.iter_mut()) {
                    *slot += p.weights[pos];
                }
                break;
            }
            let back = values[pos] as u64;
            values[pos] = 0;
            for (p, slot) in projections.iter().zip(proj.iter_mut()) {
                *slot -= back * p.weights[pos];
            }
        }
        index += 1;
    }
}

/// Iterator over all patterns on a domain, in canonical order.
#[derive(Debug, Clone)]
pub struct PatternIter {
    domain: SiteSet,
    alphabet: Alphabet,
    next: u64,
    total: u64,
}

impl Iterator for PatternIter {
    type Item = Pattern;

    fn next(&mut self) -> Option<Pattern> {
        if self.next >= self.total {
            return None;
        }
        let p = Pattern::from_index(self.domain.clone(), self.next, self.alphabet);
        self.next += 1;
        Some(p)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let rem = (self.total - self.next) as usize;
        (rem, Some(rem))
    }
}

impl ExactSizeIterator for PatternIter {}

/// All `|K|^{|domain|}` patterns on `domain`, canonical order.
pub fn enumerate_patterns(domain: &SiteSet, alphabet: Alphabet, budget: Budget) -> Result<PatternIter> {
    let total = budget.power(alphabet.size(), domain.len(), "enumerating patterns")?;
    Ok(PatternIter {
        domain: domain.clone(),
        alphabet,
        next: 0,
        total,
    })
}

/// Moves `p` by right multiplication: the result has domain `D·g` and value `p(h)` at `h·g`.
pub fn translate_pattern(p: &Pattern, g: &Word) -> Pattern {
    let mut pairs: Vec<(Word, u32)> = p.iter().map(|(h, v)| (h.mul(g), v)).collect();
    pairs.sort_by(|a, b| a.0.cmp(&b.0));
    let domain = SiteSet::new(pairs.iter().map(|x| x.0.clone()));
    Pattern::from_parts(domain, pairs.into_iter().map(|x| x.1).collect())
}

/// A finite partition of `K^G`: configurations are grouped by the label of their pattern on
/// a finite window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowPartition {
    window: SiteSet,
    alphabet: Alphabet,
    labeling: Arc<[u32]>,
    label_count: usize,
}

impl WindowPartition {
    /// `labeling[i]` is the label of the pattern with canonical index `i` on `window`.
    pub fn new(window: SiteSet, alphabet: Alphabet, labeling: Vec<u32>) -> Result<Self> {
        let expected = crate::budget::checked_pow(alphabet.size() as u64, window.len())
            .ok_or_else(|| Error::Malformed("window too large".into()))?;
        if labeling.len() as u64 != expected {
            return Err(Error::Malformed(format!(
                "labeling has {} entries, window needs {expected}",
                labeling.len()
            )));
        }
        let label_count = labeling.iter().map(|&l| l as usize + 1).max().unwrap_or(0);
        let mut seen = vec![false; label_count];
        for &l in &labeling {
            seen[l as usize] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::Malformed(format!("label {missing} is never used")));
        }
        Ok(WindowPartition {
            window,
            alphabet,
            labeling: labeling.into(),
            label_count,
        })
    }

    /// The one-cell partition.
    pub fn trivial(alphabet: Alphabet) -> Self {
        WindowPartition {
            window: SiteSet::empty(),
            alphabet,
            labeling: vec![0].into(),
            label_count: 1,
        }
    }

    /// `α = {C_k}` with `C_k = {x : x(e) = k}`.
    pub fn alpha(alphabet: Alphabet) -> Self {
        Self::full(SiteSet::singleton(Word::identity()), alphabet, Budget::unlimited())
            .expect("single-site window always fits")
    }

    /// Every pattern on `window` is its own cell.
    pub fn full(window: SiteSet, alphabet: Alphabet, budget: Budget) -> Result<Self> {
        let total = budget.power(alphabet.size(), window.len(), "building a full partition")?;
        Ok(WindowPartition {
            window,
            alphabet,
            labeling: (0..total as u32).collect::<Vec<_>>().into(),
            label_count: total as usize,
        })
    }

    pub fn window(&self) -> &SiteSet {
        &self.window
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn label_count(&self) -> usize {
        self.label_count
    }

    pub fn labeling(&self) -> &[u32] {
        &self.labeling
    }

    pub fn label_of(&self, p: &Pattern) -> Option<u32> {
        let r = p.restrict(&self.window)?;
        Some(self.labeling[r.index(self.alphabet) as usize])
    }

    /// Relabel cells in order of first appearance along the canonical pattern order.
    pub fn canonical(&self) -> WindowPartition {
        let mut map: HashMap<u32, u32> = HashMap::new();
        let labeling: Vec<u32> = self
            .labeling
            .iter()
            .map(|&l| {
                let next = map.len() as u32;
                *map.entry(l).or_insert(next)
            })
            .collect();
        WindowPartition {
            labeling: labeling.into(),
            ..self.clone()
        }
    }

    /// Same window and same cells, ignoring label names.
    pub fn same_cells(&self, other: &WindowPartition) -> bool {
        self.window == other.window
            && self.alphabet == other.alphabet
            && self.canonical().labeling == other.canonical().labeling
    }

    /// The same partition, described on a larger window.
    pub fn extend_window(&self, window: &SiteSet, budget: Budget) -> Result<WindowPartition> {
        let k = self.alphabet.size();
        budget.power(k, window.len(), "extending a partition window")?;
        let proj = Projection::restriction(window, &self.window, k).ok_or_else(|| {
            Error::InvalidParameter("target window does not contain the partition window".into())
        })?;
        let mut labeling = Vec::new();
        for_each_assignment(window.len(), k, &[&proj], |_, _, pr| {
            labeling.push(self.labeling[pr[0] as usize]);
        });
        Ok(WindowPartition {
            window: window.clone(),
            alphabet: self.alphabet,
            labeling: labeling.into(),
            label_count: self.label_count,
        })
    }
}

/// `P ∨ Q`: window is the union; each realized pair of labels gets its own label, numbered
/// in order of first appearance.
pub fn join(p: &WindowPartition, q: &WindowPartition, budget: Budget) -> Result<WindowPartition> {
    if p.alphabet != q.alphabet {
        return Err(Error::InvalidParameter(
            "cannot join partitions over different alphabets".into(),
        ));
    }
    let k = p.alphabet.size();
    let window = p.window.union(&q.window);
    budget.power(k, window.len(), "joining partitions")?;
    let pp = Projection::restriction(&window, &p.window, k).expect("subset of union");
    let qp = Projection::restriction(&window, &q.window, k).expect("subset of union");
    let mut pairs: HashMap<(u32, u32), u32> = HashMap::new();
    let mut labeling = Vec::new();
    for_each_assignment(window.len(), k, &[&pp, &qp], |_, _, pr| {
        let key = (p.labeling[pr[0] as usize], q.labeling[pr[1] as usize]);
        let next = pairs.len() as u32;
        labeling.push(*pairs.entry(key).or_insert(next));
    });
    Ok(WindowPartition {
        window,
        alphabet: p.alphabet,
        labeling: labeling.into(),
        label_count: pairs.len(),
    })
}

/// Join of a non-empty list, folded left to right.
pub fn join_all(parts: &[WindowPartition], budget: Budget) -> Result<WindowPartition> {
    let (first, rest) = parts
        .split_first()
        .ok_or_else(|| Error::InvalidParameter("empty join".into()))?;
    rest.iter().try_fold(first.clone(), |acc, q| join(&acc, q, budget))
}

/// The translate of `P` by `g`: window `W·g`, and a configuration's label is the label `P`
/// gives to the pattern `h ↦ x(h·g)`.
pub fn translate_partition(p: &WindowPartition, g: &Word, budget: Budget) -> Result<WindowPartition> {
    let k = p.alphabet.size();
    let window = p.window.right_translate(g);
    if window.len() != p.window.len() {
        return Err(Error::Internal("right translation collapsed a window".into()));
    }
    budget.power(k, window.len(), "translating a partition")?;
    let proj = Projection::translated(&window, &p.window, g, k).expect("translate covers window");
    let mut labeling = Vec::new();
    for_each_assignment(window.len(), k, &[&proj], |_, _, pr| {
        labeling.push(p.labeling[pr[0] as usize]);
    });
    Ok(WindowPartition {
        window,
        alphabet: p.alphabet,
        labeling: labeling.into(),
        label_count: p.label_count,
    })
}

/// `α^n = ⋁_{g ∈ B(e,n)} gα` for a partition `α` with window `{e}`.
pub fn alpha_join_over_ball(
    alpha: &WindowPartition,
    spec: &GroupSpec,
    n: usize,
    budget: Budget,
) -> Result<WindowPartition> {
    if *alpha.window() != SiteSet::singleton(Word::identity()) {
        return Err(Error::InvalidParameter("base partition must have window {e}".into()));
    }
    let b = ball(spec, n);
    budget.power(alpha.alphabet.size(), b.len(), "joining over a ball")?;
    let translates = b
        .iter()
        .map(|g| translate_partition(alpha, g, budget))
        .collect::<Result<Vec<_>>>()?;
    join_all(&translates, budget)
}

/// `P_n = ⋁ { T^j α : |j| ≤ n, j ≠ n-1 }` for the binary full shift over `ℤ`.
pub fn pn_partition(n: usize, budget: Budget) -> Result<WindowPartition> {
    if n < 1 {
        return Err(Error::InvalidParameter("P_n needs n ≥ 1".into()));
    }
    let spec = GroupSpec::group(1)?;
    let a = Word::parse("a", &spec)?;
    let alpha = WindowPartition::alpha(Alphabet::binary());
    let n = n as i64;
    let translates = (-n..=n)
        .filter(|&j| j != n - 1)
        .map(|j| translate_partition(&alpha, &a.pow(j), budget))
        .collect::<Result<Vec<_>>>()?;
    join_all(&translates, budget)
}
