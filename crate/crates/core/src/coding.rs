//! Ball codings and the support of the induced Markov measure.
//!
//! For a radius `n` the ball coding `φ : K^G → L^G` with `L = K^{B(e,n)}` packages the
//! `n`-ball around every site into one symbol: `φ(x)(g)(f) = x(f·g)`. Markovizing a measure
//! `μ` through `φ` gives a transition system over `L` whose tree-Markov measure `ν` agrees
//! with `φ_*μ` on every single edge. This module checks, exhaustively on finite balls,
//! that every `ν`-admissible pattern is a `φ`-image, through the reconstruction identity
//! `z(f)(e) = z(e)(f)`, and searches for admissible non-images under general
//! sliding-block codes.

use std::collections::BTreeMap;
use std::fmt;

use crate::budget::{Budget, Meter};
use crate::error::{Error, Result};
use crate::freegroup::{ball, parent_structure, GroupSpec, ParentStructure, SiteSet, Word};
use crate::measures::{
    for_each_positive, positive_tree_count, support_count, validate, window_distribution, MeasureSpec,
    SparseMatrix, TransitionSystem,
};
use crate::patterns::{digits, for_each_assignment, index_of, Alphabet, Pattern, Projection};
use crate::scalar::Scalar;

/// Ball radius `n` together with the super-alphabet `L = K^{B(e,n)}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodingLevel {
    spec: GroupSpec,
    alphabet: Alphabet,
    n: usize,
    ball: SiteSet,
    l_size: u32,
}

impl CodingLevel {
    pub fn new(spec: GroupSpec, alphabet: Alphabet, n: usize) -> Result<Self> {
        let ball = ball(&spec, n);
        let l_size = crate::budget::checked_pow(alphabet.size() as u64, ball.len())
            .filter(|&v| v <= u32::MAX as u64)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "super-alphabet {}^{} does not fit in 32 bits",
                    alphabet.size(),
                    ball.len()
                ))
            })? as u32;
        Ok(CodingLevel {
            spec,
            alphabet,
            n,
            ball,
            l_size,
        })
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ball(&self) -> &SiteSet {
        &self.ball
    }

    /// `|L| = |K|^{|B(e,n)|}`.
    pub fn l_size(&self) -> u32 {
        self.l_size
    }

    pub fn l_alphabet(&self) -> Alphabet {
        Alphabet::new(self.l_size as usize).expect("non-empty")
    }

    /// The `K`-pattern on `B(e,n)` that the `L`-symbol `l` stands for.
    pub fn symbol_pattern(&self, l: u32) -> Pattern {
        Pattern::from_index(self.ball.clone(), l as u64, self.alphabet)
    }

    pub fn symbol_of(&self, p: &Pattern) -> Result<u32> {
        if *p.domain() != self.ball {
            return Err(Error::Malformed("pattern is not on the coding ball".into()));
        }
        Ok(p.index(self.alphabet) as u32)
    }

    /// `ℓ(f)` for the ball site at position `f`.
    #[inline]
    pub fn coordinate(&self, l: u32, f: usize) -> u32 {
        let k = self.alphabet.size() as u64;
        let shift = (self.ball.len() - 1 - f) as u32;
        ((l as u64 / k.pow(shift)) % k) as u32
    }
}

/// `φ(x)` on `D' = {g : B(e,n)·g ⊆ D}`.
pub fn phi(x: &Pattern, level: &CodingLevel) -> Result<Pattern> {
    let k = level.alphabet.size();
    if x.values().iter().any(|&v| v as usize >= k) {
        return Err(Error::Malformed("pattern symbol outside the alphabet".into()));
    }
    let mut sites = Vec::new();
    let mut values = Vec::new();
    for g in x.domain().iter() {
        let coords = level
            .ball
            .iter()
            .map(|f| x.get(&f.mul(g)))
            .collect::<Option<Vec<u32>>>();
        if let Some(c) = coords {
            sites.push(g.clone());
            values.push(index_of(&c, k) as u32);
        }
    }
    // Iterating x's canonical domain keeps `sites` sorted.
    Pattern::new(SiteSet::new(sites), values, level.l_alphabet())
}

/// `ψ(z)(g) = z(g)(e)`.
pub fn psi(z: &Pattern, level: &CodingLevel) -> Result<Pattern> {
    if let Some(v) = z.values().iter().find(|&&v| v >= level.l_size) {
        return Err(Error::Malformed(format!("symbol {v} outside the super-alphabet")));
    }
    let values = z.values().iter().map(|&l| level.coordinate(l, 0)).collect();
    Pattern::new(z.domain().clone(), values, level.alphabet)
}

/// Accumulates one-edge statistics `(state at g, state at s·g)` into a transition system.
fn edge_statistics<S: Scalar>(
    mu: &MeasureSpec<S>,
    spec: &GroupSpec,
    window: &SiteSet,
    states: usize,
    encode: &dyn Fn(u64) -> u32,
    budget: Budget,
) -> Result<TransitionSystem<S>> {
    let k = mu.alphabet().size();
    let mut pi = vec![S::zero(); states];
    for (idx, w) in window_distribution(mu, window, budget)?.into_iter().enumerate() {
        if !w.is_zero() {
            let a = encode(idx as u64) as usize;
            pi[a] = pi[a].clone() + w;
        }
    }
    let mut matrices = BTreeMap::new();
    for s in spec.generators() {
        let sw = spec.word(s);
        let union = window.union(&window.right_translate(&sw));
        let dist = window_distribution(mu, &union, budget)?;
        let here = Projection::restriction(&union, window, k).expect("window inside union");
        let there = Projection::translated(&union, window, &sw, k).expect("translate inside union");
        let mut joint: Vec<BTreeMap<u32, S>> = vec![BTreeMap::new(); states];
        for_each_assignment(union.len(), k, &[&here, &there], |u, _, pr| {
            let mass = &dist[u as usize];
            if mass.is_zero() {
                return;
            }
            let (i, j) = (encode(pr[0]), encode(pr[1]));
            let slot = joint[i as usize].entry(j).or_insert_with(S::zero);
            *slot = slot.clone() + mass.clone();
        });
        let rows = joint
            .into_iter()
            .enumerate()
            .map(|(i, row)| {
                if pi[i].is_zero() {
                    vec![(i as u32, S::one())]
                } else {
                    row.into_iter()
                        .map(|(j, v)| (j, v / pi[i].clone()))
                        .collect()
                }
            })
            .collect();
        matrices.insert(s, SparseMatrix::from_rows(states, rows)?);
    }
    TransitionSystem::new(pi, matrices)
}

fn check_markov_input<S: Scalar>(mu: &MeasureSpec<S>, spec: &GroupSpec) -> Result<()> {
    if let MeasureSpec::TreeMarkov(ts) = mu {
        let r = validate(ts, spec)?;
        if !r.passed() {
            return Err(Error::InvalidMeasure(
                "tree-Markov measure fails validation; it is not shift-invariant".into(),
            ));
        }
    }
    Ok(())
}

fn assert_valid<S: Scalar>(ts: &TransitionSystem<S>, spec: &GroupSpec, what: &str) -> Result<()> {
    let r = validate(ts, spec)?;
    if !r.passed() {
        return Err(Error::Internal(format!(
            "{what} fails validation: stochastic {}, stationary {}, reversible {:?}",
            r.stochastic, r.stationary, r.reversible
        )));
    }
    Ok(())
}

/// The invariant transition system over `L` with `pi(i) = μ(i on B(e,n))` and
/// `P^s_{ij} = μ(i on B(e,n), j on B(e,n)·s) / pi(i)`. Rows of zero-probability states are
/// identity rows.
pub fn markovize<S: Scalar>(
    mu: &MeasureSpec<S>,
    level: &CodingLevel,
    budget: Budget,
) -> Result<TransitionSystem<S>> {
    if mu.alphabet() != level.alphabet {
        return Err(Error::InvalidParameter("measure and coding level use different alphabets".into()));
    }
    check_markov_input(mu, &level.spec)?;
    budget.check(level.l_size as u128, "allocating the super-alphabet")?;
    let ts = edge_statistics(mu, &level.spec, &level.ball, level.l_size as usize, &|i| i as u32, budget)?;
    assert_valid(&ts, &level.spec, "markovized system")?;
    Ok(ts)
}

/// Per-site `(parent index, transition matrix)` along the geodesic tree of a ball.
struct TreeLinks<'a, S> {
    pi: &'a [S],
    links: Vec<Option<(usize, &'a SparseMatrix<S>)>>,
}

impl<'a, S: Scalar> TreeLinks<'a, S> {
    fn new(ts: &'a TransitionSystem<S>, tree: &ParentStructure) -> Result<Self> {
        let links = (0..tree.sites().len())
            .map(|i| match tree.parent(i) {
                None => Ok(None),
                Some((t, p)) => Ok(Some((p, ts.matrix(t)?))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TreeLinks { pi: ts.pi(), links })
    }

    fn walk(&self, meter: &mut Meter, visit: &mut dyn FnMut(&[u32]) -> Result<()>) -> Result<()> {
        let mut values = vec![0u32; self.links.len()];
        self.step(0, &mut values, meter, visit)
    }

    fn step(
        &self,
        pos: usize,
        values: &mut Vec<u32>,
        meter: &mut Meter,
        visit: &mut dyn FnMut(&[u32]) -> Result<()>,
    ) -> Result<()> {
        if pos == values.len() {
            return visit(values);
        }
        match self.links[pos] {
            None => {
                for (v, p) in self.pi.iter().enumerate() {
                    if p.is_positive() {
                        meter.tick()?;
                        values[pos] = v as u32;
                        self.step(pos + 1, values, meter, visit)?;
                    }
                }
            }
            Some((parent, m)) => {
                for (v, p) in m.row(values[parent] as usize) {
                    if p.is_positive() {
                        meter.tick()?;
                        values[pos] = *v;
                        self.step(pos + 1, values, meter, visit)?;
                    }
                }
            }
        }
        Ok(())
    }
}

fn ball_radius_of(domain: &SiteSet, spec: &GroupSpec) -> Result<usize> {
    let m = domain.radius().unwrap_or(0);
    if *domain != ball(spec, m) {
        return Err(Error::Malformed(format!("domain {domain} is not a ball")));
    }
    Ok(m)
}

/// Whether `z`, a pattern on a ball `B(e,m)`, lies in the support of the tree-Markov measure
/// of `ts`: `pi(z(e)) > 0` and every geodesic edge carries a positive transition.
pub fn admissible<S: Scalar>(z: &Pattern, ts: &TransitionSystem<S>, spec: &GroupSpec) -> Result<bool> {
    ball_radius_of(z.domain(), spec)?;
    if z.values().iter().any(|&v| v as usize >= ts.states()) {
        return Err(Error::Malformed("pattern symbol outside the state set".into()));
    }
    let tree = parent_structure(z.domain(), spec)?;
    let v = z.values();
    if !ts.pi()[v[0] as usize].is_positive() {
        return Ok(false);
    }
    for (p, c, t) in tree.edges() {
        if !ts.matrix(t)?.get(v[p] as usize, v[c] as usize).is_positive() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Admissibility checked over every ordered pair `(g, s·g)` inside the ball, not only tree
/// edges. Agrees with [`admissible`] for valid systems; kept as a cross-check.
pub fn admissible_all_pairs<S: Scalar>(
    z: &Pattern,
    ts: &TransitionSystem<S>,
    spec: &GroupSpec,
) -> Result<bool> {
    ball_radius_of(z.domain(), spec)?;
    let v = z.values();
    if !ts.pi()[v[0] as usize].is_positive() {
        return Ok(false);
    }
    for (gi, g) in z.domain().iter().enumerate() {
        for s in spec.generators() {
            if let Some(hi) = z.domain().index_of(&spec.word(s).mul(g)) {
                if !ts.matrix(s)?.get(v[gi] as usize, v[hi] as usize).is_positive() {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// A sorted, deduplicated set of patterns on one domain, each stored as its canonical index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternSet {
    domain: SiteSet,
    alphabet: Alphabet,
    codes: Vec<u128>,
}

impl PatternSet {
    fn new(domain: SiteSet, alphabet: Alphabet) -> Result<Self> {
        let fits = (0..domain.len()).try_fold(1u128, |acc, _| acc.checked_mul(alphabet.size() as u128));
        if fits.is_none() {
            return Err(Error::InvalidParameter(
                "pattern space too large to index in 128 bits".into(),
            ));
        }
        Ok(PatternSet {
            domain,
            alphabet,
            codes: Vec::new(),
        })
    }

    fn encode(&self, values: &[u32]) -> u128 {
        values
            .iter()
            .fold(0u128, |acc, &v| acc * self.alphabet.size() as u128 + v as u128)
    }

    fn decode(&self, mut code: u128) -> Vec<u32> {
        let k = self.alphabet.size() as u128;
        let mut out = vec![0u32; self.domain.len()];
        for slot in out.iter_mut().rev() {
            *slot = (code % k) as u32;
            code /= k;
        }
        out
    }

    fn finish(&mut self) {
        self.codes.sort_unstable();
        self.codes.dedup();
    }

    pub fn domain(&self) -> &SiteSet {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn contains(&self, p: &Pattern) -> bool {
        *p.domain() == self.domain && self.codes.binary_search(&self.encode(p.values())).is_ok()
    }

    pub fn contains_values(&self, values: &[u32]) -> bool {
        self.codes.binary_search(&self.encode(values)).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = Pattern> + '_ {
        self.codes
            .iter()
            .map(|&c| Pattern::new(self.domain.clone(), self.decode(c), self.alphabet).expect("in range"))
    }

    /// Up to `limit` members of `self` that are missing from `other`, in canonical order.
    pub fn difference(&self, other: &PatternSet, limit: usize) -> Vec<Pattern> {
        self.codes
            .iter()
            .filter(|c| other.codes.binary_search(c).is_err())
            .take(limit)
            .map(|&c| Pattern::new(self.domain.clone(), self.decode(c), self.alphabet).expect("in range"))
            .collect()
    }

    pub fn is_subset(&self, other: &PatternSet) -> bool {
        self.domain == other.domain && self.codes.iter().all(|c| other.codes.binary_search(c).is_ok())
    }
}

/// The patterns on `B(e,m)` admissible for `ts`, by depth-first extension along the geodesic
/// tree with pruning on zero transitions. Canonical order.
pub fn enumerate_admissible<S: Scalar>(
    ts: &TransitionSystem<S>,
    spec: &GroupSpec,
    m: usize,
    budget: Budget,
) -> Result<PatternSet> {
    let b = ball(spec, m);
    let tree = parent_structure(&b, spec)?;
    let mut set = PatternSet::new(b, ts.alphabet())?;
    let links = TreeLinks::new(ts, &tree)?;
    let mut meter = Meter::new(budget, "enumerating admissible patterns");
    let mut codes = Vec::new();
    links.walk(&mut meter, &mut |vals| {
        codes.push(set.encode(vals));
        Ok(())
    })?;
    set.codes = codes;
    debug_assert!(set.codes.windows(2).all(|w| w[0] < w[1]));
    Ok(set)
}

/// Number of admissible patterns on `B(e,m)`, by a leaves-to-root count.
pub fn admissible_count<S: Scalar>(ts: &TransitionSystem<S>, spec: &GroupSpec, m: usize) -> Result<u128> {
    positive_tree_count(ts, &ball(spec, m))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Exhaustive when it fits the budget, otherwise the reduced method.
    Auto,
    /// Visit every admissible pattern or compare the two sets element by element.
    Exhaustive,
    /// Reduced method: geodesic-path projection for reconstruction checks, exact counting
    /// plus local inclusion for oracle comparison.
    Reduced,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Auto => write!(f, "auto"),
            Strategy::Exhaustive => write!(f, "exhaustive"),
            Strategy::Reduced => write!(f, "reduced"),
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Strategy::Auto),
            "exhaustive" => Ok(Strategy::Exhaustive),
            "reduced" => Ok(Strategy::Reduced),
            other => Err(Error::InvalidParameter(format!("unknown strategy {other:?}"))),
        }
    }
}

/// A failure of `z(f)(e) = z(e)(f)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub site: Word,
    /// `z(e)`.
    pub center: u32,
    /// `z(f)`.
    pub at_site: u32,
    /// The whole pattern, when the check visited one.
    pub pattern: Option<Pattern>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReconstructionReport {
    pub n: usize,
    pub strategy: Strategy,
    /// Admissible patterns on `B(e,n)` covered by the check.
    pub patterns_checked: u128,
    /// Exhaustive: one comparison per `(pattern, f)`. Reduced: one per `(f, z(e)(f), z(f))`.
    pub comparisons: u128,
    /// Counted in the same units as `comparisons`.
    pub violation_count: u128,
    /// The first violations found, capped at [`MAX_REPORTED`].
    pub violations: Vec<Violation>,
}

impl ReconstructionReport {
    pub fn holds(&self) -> bool {
        self.violation_count == 0
    }
}

pub const MAX_REPORTED: usize = 16;

/// Checks `z(f)(e) = z(e)(f)` for every `f ∈ B(e,n)` and every pattern `z` on `B(e,n)`
/// admissible for `markovize(mu, level)`.
pub fn check_reconstruction<S: Scalar>(
    mu: &MeasureSpec<S>,
    level: &CodingLevel,
    budget: Budget,
    strategy: Strategy,
) -> Result<ReconstructionReport> {
    let ts = markovize(mu, level, budget)?;
    check_reconstruction_for(&ts, level, budget, strategy)
}

/// [`check_reconstruction`] against an arbitrary transition system over `L`.
pub fn check_reconstruction_for<S: Scalar>(
    ts: &TransitionSystem<S>,
    level: &CodingLevel,
    budget: Budget,
    strategy: Strategy,
) -> Result<ReconstructionReport> {
    if ts.states() != level.l_size as usize {
        return Err(Error::Malformed("transition system is not over the super-alphabet".into()));
    }
    let total = admissible_count(ts, &level.spec, level.n)?;
    let nodes = total.saturating_mul(level.ball.len() as u128);
    let use_exhaustive = match strategy {
        Strategy::Exhaustive => true,
        Strategy::Reduced => false,
        Strategy::Auto => nodes <= budget.max_nodes as u128,
    };
    if !use_exhaustive {
        return reconstruction_by_paths(ts, level, total, budget);
    }
    match reconstruction_exhaustive(ts, level, level.n, budget) {
        Ok(r) => {
            if r.patterns_checked != total {
                return Err(Error::Internal(format!(
                    "enumerated {} admissible patterns but counted {total}",
                    r.patterns_checked
                )));
            }
            Ok(r)
        }
        Err(Error::BudgetExceeded { what, needed, limit, .. }) => {
            let mut completed = None;
            for k in 0..level.n {
                if reconstruction_exhaustive(ts, level, k, budget).is_ok() {
                    completed = Some(k);
                } else {
                    break;
                }
            }
            Err(Error::BudgetExceeded {
                what,
                needed,
                limit,
                completed,
            })
        }
        Err(e) => Err(e),
    }
}

/// Exhaustive check on `B(e,radius) ⊆ B(e,n)` for `f ∈ B(e,radius)`.
fn reconstruction_exhaustive<S: Scalar>(
    ts: &TransitionSystem<S>,
    level: &CodingLevel,
    radius: usize,
    budget: Budget,
) -> Result<ReconstructionReport> {
    let b = ball(&level.spec, radius);
    let tree = parent_structure(&b, &level.spec)?;
    let links = TreeLinks::new(ts, &tree)?;
    // Position of each sub-ball site within the coding ball.
    let pos: Vec<usize> = b
        .iter()
        .map(|f| level.ball.index_of(f).expect("sub-ball"))
        .collect();
    let mut meter = Meter::new(budget, "enumerating admissible patterns");
    let mut checked = 0u128;
    let mut comparisons = 0u128;
    let mut count = 0u128;
    let mut violations = Vec::new();
    links.walk(&mut meter, &mut |z| {
        checked += 1;
        for (fi, &fp) in pos.iter().enumerate() {
            comparisons += 1;
            if level.coordinate(z[fi], 0) != level.coordinate(z[0], fp) {
                count += 1;
                if violations.len() < MAX_REPORTED {
                    violations.push(Violation {
                        site: b.words()[fi].clone(),
                        center: z[0],
                        at_site: z[fi],
                        pattern: Some(Pattern::new(b.clone(), z.to_vec(), level.l_alphabet())?),
                    });
                }
            }
        }
        Ok(())
    })?;
    Ok(ReconstructionReport {
        n: radius,
        strategy: Strategy::Exhaustive,
        patterns_checked: checked,
        comparisons,
        violation_count: count,
        violations,
    })
}

/// The comparison at `f` involves only `z(e)(f)` and `z(f)(e)`. Every admissible partial
/// assignment extends to the whole ball (positive states have positive successors), so the
/// states `z(f)` that occur with `z(e)(f) = c` are exactly those reachable by positive
/// transitions along the geodesic from `e` to `f`, starting from any positive root whose
/// `f`-coordinate is `c`. Each reachable state keeps the smallest root that reaches it as a
/// witness. Violations are counted once per `(f, c, z(f))`.
fn reconstruction_by_paths<S: Scalar>(
    ts: &TransitionSystem<S>,
    level: &CodingLevel,
    total: u128,
    budget: Budget,
) -> Result<ReconstructionReport> {
    let tree = parent_structure(&level.ball, &level.spec)?;
    let mut meter = Meter::new(budget, "propagating geodesic paths");
    let mut comparisons = 0u128;
    let mut violations = Vec::new();
    let mut count = 0u128;
    for (fp, f) in level.ball.iter().enumerate() {
        let mut path = Vec::new();
        let mut cur = fp;
        while let Some((t, p)) = tree.parent(cur) {
            path.push(t);
            cur = p;
        }
        path.reverse();
        for c in 0..level.alphabet.size() as u32 {
            let mut frontier: BTreeMap<u32, u32> = (0..level.l_size)
                .filter(|&i| ts.pi()[i as usize].is_positive() && level.coordinate(i, fp) == c)
                .map(|i| (i, i))
                .collect();
            for &t in &path {
                let m = ts.matrix(t)?;
                let mut next = BTreeMap::new();
                for (&i, &root) in &frontier {
                    for (j, v) in m.row(i as usize) {
                        if v.is_positive() {
                            meter.tick()?;
                            next.entry(*j).or_insert(root);
                        }
                    }
                }
                frontier = next;
            }
            for (&j, &root) in &frontier {
                comparisons += 1;
                if level.coordinate(j, 0) != c {
                    count += 1;
                    if violations.len() < MAX_REPORTED {
                        violations.push(Violation {
                            site: f.clone(),
                            center: root,
                            at_site: j,
                            pattern: None,
                        });
                    }
                }
            }
        }
    }
    Ok(ReconstructionReport {
        n: level.n,
        strategy: Strategy::Reduced,
        patterns_checked: total,
        comparisons,
        violation_count: count,
        violations,
    })
}

/// `{ φ(y)|B(e,m) : y ∈ K^{B(e,m+n)}, μ(y) > 0 }`.
pub fn image_oracle<S: Scalar>(
    mu: &MeasureSpec<S>,
    level: &CodingLevel,
    m: usize,
    budget: Budget,
) -> Result<PatternSet> {
    let k = level.alphabet.size();
    let big = ball(&level.spec, m + level.n);
    budget.power(k, big.len(), "enumerating image preimages")?;
    let target = ball(&level.spec, m);
    let projections = target
        .iter()
        .map(|g| Projection::translated(&big, &level.ball, g, k).expect("B(e,n)·B(e,m) ⊆ B(e,m+n)"))
        .collect::<Vec<_>>();
    let mut set = PatternSet::new(target, level.l_alphabet())?;
    let mut codes = Vec::new();
    let mut z = vec![0u32; projections.len()];
    for_each_positive(mu, &big, budget, "enumerating image preimages", |y, _| {
        for (slot, p) in z.iter_mut().zip(&projections) {
            *slot = p.apply(y) as u32;
        }
        codes.push(set.encode(&z));
    })?;
    set.codes = codes;
    set.finish();
    Ok(set)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleComparison {
    pub m: usize,
    pub strategy: Strategy,
    pub admissible_count: u128,
    pub image_count: u128,
    pub equal: bool,
    /// Admissible patterns with no preimage (exhaustive strategy only).
    pub admissible_not_image: Vec<Pattern>,
    /// Images that are not admissible (exhaustive strategy only).
    pub image_not_admissible: Vec<Pattern>,
    /// Reduced strategy: every positive one-edge pattern maps to a positive transition.
    pub local_inclusion: Option<bool>,
}

/// Compares the admissible set of `markovize(mu, level)` on `B(e,m)` with [`image_oracle`].
///
/// The reduced strategy avoids listing either set: `image ⊆ admissible` reduces to the
/// root and one-edge windows, which are checked directly, and `φ` is injective on
/// `B(e,m+n)`-patterns, so equal cardinalities then force equality.
pub fn compare_with_oracle<S: Scalar>(
    mu: &MeasureSpec<S>,
    level: &CodingLevel,
    m: usize,
    budget: Budget,
    strategy: Strategy,
) -> Result<OracleComparison> {
    let ts = markovize(mu, level, budget)?;
    let admissible_total = admissible_count(&ts, &level.spec, m)?;
    let big = ball(&level.spec, m + level.n);
    let k = level.alphabet.size();
    let fits = crate::budget::checked_pow(k as u64, big.len()).is_some_and(|v| v <= budget.max_nodes)
        && admissible_total.saturating_mul(big.len() as u128) <= budget.max_nodes as u128;
    let exhaustive = match strategy {
        Strategy::Exhaustive => true,
        Strategy::Reduced => false,
        Strategy::Auto => fits,
    };
    if exhaustive {
        let adm = enumerate_admissible(&ts, &level.spec, m, budget)?;
        let img = image_oracle(mu, level, m, budget)?;
        let a_not_i = adm.difference(&img, MAX_REPORTED);
        let i_not_a = img.difference(&adm, MAX_REPORTED);
        return Ok(OracleComparison {
            m,
            strategy: Strategy::Exhaustive,
            admissible_count: adm.len() as u128,
            image_count: img.len() as u128,
            equal: adm == img,
            admissible_not_image: a_not_i,
            image_not_admissible: i_not_a,
            local_inclusion: None,
        });
    }

    let target = ball(&level.spec, m);
    if !level.ball.product(&target).is_subset(&big) || !big.is_subset(&level.ball.product(&target)) {
        return Err(Error::Internal("B(e,n)·B(e,m) differs from B(e,m+n)".into()));
    }
    let image_total = support_count(mu, &big)?;
    let local = local_inclusion(mu, level, &ts, budget)?;
    Ok(OracleComparison {
        m,
        strategy: Strategy::Reduced,
        admissible_count: admissible_total,
        image_count: image_total,
        equal: local && admissible_total == image_total,
        admissible_not_image: Vec::new(),
        image_not_admissible: Vec::new(),
        local_inclusion: Some(local),
    })
}

/// Every positive pattern on `B(e,n)` has positive `pi`, and every positive pattern on
/// `B(e,n) ∪ B(e,n)·s` induces a positive `P^s` entry.
fn local_inclusion<S: Scalar>(
    mu: &MeasureSpec<S>,
    level: &CodingLevel,
    ts: &TransitionSystem<S>,
    budget: Budget,
) -> Result<bool> {
    let k = level.alphabet.size();
    let root = window_distribution(mu, &level.ball, budget)?;
    if root
        .iter()
        .enumerate()
        .any(|(i, w)| w.is_positive() && !ts.pi()[i].is_positive())
    {
        return Ok(false);
    }
    for s in level.spec.generators() {
        let sw = level.spec.word(s);
        let union = level.ball.union(&level.ball.right_translate(&sw));
        let dist = window_distribution(mu, &union, budget)?;
        let here = Projection::restriction(&union, &level.ball, k).expect("subset");
        let there = Projection::translated(&union, &level.ball, &sw, k).expect("subset");
        let m = ts.matrix(s)?;
        let mut ok = true;
        for_each_assignment(union.len(), k, &[&here, &there], |u, _, pr| {
            if dist[u as usize].is_positive() && !m.get(pr[0] as usize, pr[1] as usize).is_positive() {
                ok = false;
            }
        });
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A sliding-block code `c : K^W → M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralCode {
    window: SiteSet,
    source: Alphabet,
    target: Alphabet,
    /// Indexed by the canonical pattern index on `window`.
    map: Vec<u32>,
}

impl GeneralCode {
    pub fn new(window: SiteSet, source: Alphabet, target: Alphabet, map: Vec<u32>) -> Result<Self> {
        let expected = crate::budget::checked_pow(source.size() as u64, window.len())
            .ok_or_else(|| Error::Malformed("code window too large".into()))?;
        if map.len() as u64 != expected {
            return Err(Error::Malformed(format!(
                "code table has {} entries, window needs {expected}",
                map.len()
            )));
        }
        if let Some(v) = map.iter().find(|&&v| v as usize >= target.size()) {
            return Err(Error::Malformed(format!("code value {v} outside target alphabet")));
        }
        Ok(GeneralCode {
            window,
            source,
            target,
            map,
        })
    }

    /// Tabulates `f` over the window patterns; `f` sees values in canonical site order.
    pub fn from_fn(
        window: SiteSet,
        source: Alphabet,
        target: Alphabet,
        f: impl Fn(&[u32]) -> u32,
    ) -> Result<Self> {
        let total = crate::budget::checked_pow(source.size() as u64, window.len())
            .ok_or_else(|| Error::Malformed("code window too large".into()))?;
        let map = (0..total)
            .map(|i| f(&digits(i, window.len(), source.size())))
            .collect();
        Self::new(window, source, target, map)
    }

    pub fn identity(alphabet: Alphabet) -> Self {
        GeneralCode {
            window: SiteSet::singleton(Word::identity()),
            source: alphabet,
            target: alphabet,
            map: (0..alphabet.size() as u32).collect(),
        }
    }

    /// The ball coding of `level` viewed as a sliding-block code.
    pub fn ball_code(level: &CodingLevel) -> Self {
        GeneralCode {
            window: level.ball.clone(),
            source: level.alphabet,
            target: level.l_alphabet(),
            map: (0..level.l_size).collect(),
        }
    }

    pub fn window(&self) -> &SiteSet {
        &self.window
    }

    pub fn source(&self) -> Alphabet {
        self.source
    }

    pub fn target(&self) -> Alphabet {
        self.target
    }

    pub fn apply(&self, window_values: &[u32]) -> u32 {
        self.map[index_of(window_values, self.source.size()) as usize]
    }

    /// Code value at every site of `at`, read off a `K`-pattern covering `W·at`.
    pub fn image(&self, x: &Pattern, at: &SiteSet) -> Option<Pattern> {
        let values = at
            .iter()
            .map(|g| {
                let vals = self
                    .window
                    .iter()
                    .map(|f| x.get(&f.mul(g)))
                    .collect::<Option<Vec<_>>>()?;
                Some(self.apply(&vals))
            })
            .collect::<Option<Vec<_>>>()?;
        Pattern::new(at.clone(), values, self.target).ok()
    }
}

/// The level-zero Markovization over `M` of the pushforward of `mu` under `code`.
pub fn pushforward_markov<S: Scalar>(
    mu: &MeasureSpec<S>,
    code: &GeneralCode,
    spec: &GroupSpec,
    budget: Budget,
) -> Result<TransitionSystem<S>> {
    if mu.alphabet() != code.source {
        return Err(Error::InvalidParameter("code source alphabet differs from the measure's".into()));
    }
    check_markov_input(mu, spec)?;
    let ts = edge_statistics(
        mu,
        spec,
        &code.window,
        code.target.size(),
        &|i| code.map[i as usize],
        budget,
    )?;
    assert_valid(&ts, spec, "pushforward system")?;
    Ok(ts)
}

/// `{ c(y) on B(e,m) : y on W·B(e,m), μ(y) > 0 }`.
pub fn code_image<S: Scalar>(
    mu: &MeasureSpec<S>,
    code: &GeneralCode,
    spec: &GroupSpec,
    m: usize,
    budget: Budget,
) -> Result<PatternSet> {
    let k = code.source.size();
    let target = ball(spec, m);
    let needed = code.window.product(&target);
    let sites = match mu {
        MeasureSpec::Bernoulli(_) => needed.clone(),
        MeasureSpec::TreeMarkov(_) => needed.suffix_hull(),
    };
    budget.power(k, sites.len(), "enumerating code preimages")?;
    let projections = target
        .iter()
        .map(|g| Projection::translated(&sites, &code.window, g, k).expect("covered"))
        .collect::<Vec<_>>();
    let mut set = PatternSet::new(target, code.target)?;
    let mut codes = Vec::new();
    let mut z = vec![0u32; projections.len()];
    for_each_positive(mu, &sites, budget, "enumerating code preimages", |y, _| {
        for (slot, p) in z.iter_mut().zip(&projections) {
            *slot = code.map[p.apply(y) as usize];
        }
        codes.push(set.encode(&z));
    })?;
    set.codes = codes;
    set.finish();
    Ok(set)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GapOutcome {
    /// Smallest radius with an admissible pattern outside the image, and the canonically
    /// first such pattern.
    Gap { m: usize, witness: Pattern },
    NoGap { m_max: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport<S> {
    pub system: TransitionSystem<S>,
    /// `(m, admissible count, image count)` for each radius examined.
    pub rows: Vec<(usize, usize, usize)>,
    pub outcome: GapOutcome,
}

/// Looks for `m ∈ 1..=m_max` and a pattern on `B(e,m)` admissible for the pushforward's
/// Markovization but outside the code's image.
pub fn support_gap_search<S: Scalar>(
    mu: &MeasureSpec<S>,
    code: &GeneralCode,
    spec: &GroupSpec,
    m_max: usize,
    budget: Budget,
) -> Result<GapReport<S>> {
    let ts = pushforward_markov(mu, code, spec, budget)?;
    let mut rows = Vec::new();
    for m in 1..=m_max {
        let adm = enumerate_admissible(&ts, spec, m, budget)?;
        let img = code_image(mu, code, spec, m, budget)?;
        if !img.is_subset(&adm) {
            return Err(Error::Internal(format!(
                "code image on B(e,{m}) is not contained in the admissible set"
            )));
        }
        rows.push((m, adm.len(), img.len()));
        if let Some(witness) = adm.difference(&img, 1).into_iter().next() {
            return Ok(GapReport {
                system: ts,
                rows,
                outcome: GapOutcome::Gap { m, witness },
            });
        }
    }
    Ok(GapReport {
        system: ts,
        rows,
        outcome: GapOutcome::NoGap { m_max },
    })
}

/// Brute-force preimage search for rank-one codes, independent of the ball machinery:
/// tries every positive `K`-word `y_0 … y_{len-1}` at sites `a^0 … a^{len-1}` for
/// `len ≤ max_len`, slides the code along it, and looks for the witness as a contiguous
/// block. Returns a preimage word if one exists.
pub fn brute_force_preimage<S: Scalar>(
    mu: &MeasureSpec<S>,
    code: &GeneralCode,
    spec: &GroupSpec,
    witness: &Pattern,
    max_len: usize,
    budget: Budget,
) -> Result<Option<Vec<u32>>> {
    if spec.rank() != 1 {
        return Err(Error::UnsupportedMode("brute-force preimage search needs rank one".into()));
    }
    let exps = |d: &SiteSet| -> Result<Vec<i64>> {
        d.iter()
            .map(|w| w.z_exponent().ok_or_else(|| Error::Malformed("site outside <a>".into())))
            .collect()
    };
    let wexp = exps(&code.window)?;
    let mut target: Vec<(i64, u32)> = exps(witness.domain())?
        .into_iter()
        .zip(witness.values().iter().copied())
        .collect();
    target.sort();
    let (Some(&wmin), Some(&wmax)) = (wexp.iter().min(), wexp.iter().max()) else {
        return Err(Error::Malformed("empty code window".into()));
    };
    let (tmin, tmax) = (target[0].0, target[target.len() - 1].0);
    let k = code.source.size();
    let a = spec.letter(1, false)?;
    let mut meter = Meter::new(budget, "brute-force preimage search");
    for len in 1..=max_len {
        let domain = SiteSet::new((0..len as i64).map(|j| Word::from_letters(std::iter::repeat_n(a, j as usize))));
        let total = budget.power(k, len, "brute-force preimage search")?;
        for idx in 0..total {
            meter.tick()?;
            let y = digits(idx, len, k);
            // sites a^0..a^{len-1} are in canonical order already
            let p = Pattern::new(domain.clone(), y.clone(), code.source)?;
            if !crate::measures::is_positive(mu, &p, budget)? {
                continue;
            }
            // code value at a^t needs y at t + wexp[f] for every f
            let value_at = |t: i64| -> Option<u32> {
                let vals = wexp
                    .iter()
                    .map(|&d| {
                        let s = t + d;
                        (0..len as i64).contains(&s).then(|| y[s as usize])
                    })
                    .collect::<Option<Vec<_>>>()?;
                Some(code.apply(&vals))
            };
            let lo = -wmin - tmin;
            let hi = len as i64 - 1 - wmax - tmax;
            for shift in lo..=hi {
                if target
                    .iter()
                    .all(|&(e, v)| value_at(e + shift) == Some(v))
                {
                    return Ok(Some(y));
                }
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::marginal;
    use crate::patterns::{enumerate_patterns, translate_pattern};
    use num_rational::BigRational;
    use std::collections::BTreeSet;

    type Q = BigRational;

    fn q(n: u64, d: u64) -> Q {
        Q::ratio(n, d)
    }

    fn z() -> GroupSpec {
        GroupSpec::group(1).unwrap()
    }

    fn fair() -> MeasureSpec<Q> {
        MeasureSpec::uniform_bernoulli(2).unwrap()
    }

    fn budget() -> Budget {
        Budget::default()
    }

    fn generic_ts(spec: &GroupSpec) -> TransitionSystem<Q> {
        let p1 = vec![vec![q(1, 2), q(1, 2)], vec![q(1, 4), q(3, 4)]];
        let p2 = vec![vec![q(1, 4), q(3, 4)], vec![q(3, 8), q(5, 8)]];
        let mats = spec
            .generators()
            .into_iter()
            .map(|s| (s, if s.index() == 1 { p1.clone() } else { p2.clone() }))
            .collect();
        TransitionSystem::from_dense(vec![q(1, 3), q(2, 3)], mats).unwrap()
    }

    fn measures(spec: &GroupSpec) -> Vec<MeasureSpec<Q>> {
        vec![
            fair(),
            MeasureSpec::bernoulli(vec![q(1, 4), q(3, 4)]).unwrap(),
            MeasureSpec::deterministic_chain(2, spec).unwrap(),
            MeasureSpec::tree_markov(generic_ts(spec), spec).unwrap(),
        ]
    }

    /// Values of a pattern on `{a^j}` listed by exponent.
    fn by_exponent(p: &Pattern) -> Vec<(i64, u32)> {
        let mut v: Vec<_> = p
            .iter()
            .map(|(w, x)| (w.z_exponent().unwrap(), x))
            .collect();
        v.sort();
        v
    }

    #[test]
    fn level_sizes() {
        let l = CodingLevel::new(z(), Alphabet::binary(), 1).unwrap();
        assert_eq!(l.l_size(), 8);
        let l = CodingLevel::new(GroupSpec::group(2).unwrap(), Alphabet::new(3).unwrap(), 1).unwrap();
        assert_eq!(l.l_size(), 3u32.pow(5));
        assert!(CodingLevel::new(GroupSpec::group(2).unwrap(), Alphabet::binary(), 3).is_err());
        for s in 0..8 {
            assert_eq!(l.symbol_of(&l.symbol_pattern(s)).unwrap(), s);
        }
    }

    #[test]
    fn phi_unwinds_ball_symbols() {
        let spec = z();
        let level = CodingLevel::new(spec.clone(), Alphabet::binary(), 1).unwrap();
        let a = spec.word(spec.letter(1, false).unwrap());
        let b2 = ball(&spec, 2);
        // x(a^j) = [j ∈ {-1, 2}]
        let x = Pattern::from_pairs(
            b2.iter().map(|w| {
                let j = w.z_exponent().unwrap();
                (w.clone(), u32::from(j == -1 || j == 2))
            }),
            Alphabet::binary(),
        )
        .unwrap();
        let y = phi(&x, &level).unwrap();
        assert_eq!(*y.domain(), ball(&spec, 1));
        let at = |g: &Word| level.symbol_pattern(y.get(g).unwrap());
        let read = |p: Pattern| by_exponent(&p).into_iter().map(|e| e.1).collect::<Vec<_>>();
        // (x(a^-1), x(e), x(a)) and (x(e), x(a), x(a^2))
        assert_eq!(read(at(&Word::identity())), vec![1, 0, 0]);
        assert_eq!(read(at(&a)), vec![0, 0, 1]);
    }

    #[test]
    fn phi_level_zero_and_empty_output() {
        let spec = GroupSpec::group(2).unwrap();
        let level = CodingLevel::new(spec.clone(), Alphabet::new(3).unwrap(), 0).unwrap();
        for x in enumerate_patterns(&ball(&spec, 1), Alphabet::new(3).unwrap(), budget()).unwrap() {
            assert_eq!(phi(&x, &level).unwrap(), x);
            assert_eq!(psi(&x, &level).unwrap(), x);
        }
        let level = CodingLevel::new(spec.clone(), Alphabet::binary(), 1).unwrap();
        let x = Pattern::new(ball(&spec, 0), vec![1], Alphabet::binary()).unwrap();
        assert!(phi(&x, &level).unwrap().domain().is_empty());
    }

    #[test]
    fn psi_of_constant_and_inverse_of_phi() {
        for spec in [z(), GroupSpec::group(2).unwrap(), GroupSpec::semigroup(2).unwrap()] {
            let level = CodingLevel::new(spec.clone(), Alphabet::binary(), 1).unwrap();
            let d = ball(&spec, 1);
            for l in [0, 5, level.l_size() - 1] {
                let zc = Pattern::new(d.clone(), vec![l; d.len()], level.l_alphabet()).unwrap();
                let k = level.coordinate(l, 0);
                assert_eq!(psi(&zc, &level).unwrap().values(), vec![k; d.len()].as_slice());
            }
            for x in enumerate_patterns(&ball(&spec, 2), Alphabet::binary(), budget()).unwrap() {
                let y = phi(&x, &level).unwrap();
                assert_eq!(psi(&y, &level).unwrap(), x.restrict(y.domain()).unwrap());
            }
        }
    }

    #[test]
    fn phi_is_equivariant() {
        let spec = GroupSpec::group(2).unwrap();
        let level = CodingLevel::new(spec.clone(), Alphabet::binary(), 1).unwrap();
        let d = ball(&spec, 1).union(&ball(&spec, 1).right_translate(&Word::parse("a", &spec).unwrap()));
        let d = d.union(&ball(&spec, 2).intersection(&d.product(&ball(&spec, 1))));
        let hs = ["a", "B", "ab"].map(|h| Word::parse(h, &spec).unwrap());
        let mut seen = 0;
        for (i, x) in enumerate_patterns(&d, Alphabet::binary(), budget()).unwrap().enumerate() {
            if i % 97 != 0 {
                continue;
            }
            for h in &hs {
                let lhs = phi(&translate_pattern(&x, h), &level).unwrap();
                let rhs = translate_pattern(&phi(&x, &level).unwrap(), h);
                assert_eq!(lhs, rhs);
                seen += usize::from(!lhs.domain().is_empty());
            }
        }
        assert!(seen > 0);
    }

    #[test]
    fn markovize_level_zero_is_independent() {
        let spec = GroupSpec::group(2).unwrap();
        let mu = MeasureSpec::bernoulli(vec![q(1, 4), q(3, 4)]).unwrap();
        let level = CodingLevel::new(spec.clone(), Alphabet::binary(), 0).unwrap();
        let ts = markovize(&mu, &level, budget()).unwrap();
        assert_eq!(ts.pi(), &[q(1, 4), q(3, 4)]);
        for s in spec.generators() {
            for i in 0..2 {
                assert_eq!(ts.matrix(s).unwrap().get(i, 0), q(1, 4));
                assert_eq!(ts.matrix(s).unwrap().get(i, 1), q(3, 4));
            }
        }
    }

    #[test]
    fn markovize_fair_level_one_matches_brute_force() {
        let spec = z();
        let level = CodingLevel::new(spec.clone(), Alphabet::binary(), 1).unwrap();
        let ts = markovize(&fair(), &level, budget()).unwrap();
        let a = spec.letter(1, false).unwrap();
        // Oracle: the 2^5 words y on a^-2..a^2; i = y on a^-1..a^1, j = y on a^0..a^2.
        let sym = |w: [u32; 3]| {
            let p = Pattern::from_pairs(
                [-1i64, 0, 1].iter().zip(w).map(|(&e, v)| (Word::identity().mul(&spec.word(a).pow(e)), v)),
                Alphabet::binary(),
            )
            .unwrap();
            level.symbol_of(&p).unwrap() as usize
        };
        let mut counts = vec![vec![0u32; 8]; 8];
        for y in 0..32u32 {
            let b: Vec<u32> = (0..5).map(|t| (y >> t) & 1).collect();
            counts[sym([b[1], b[2], b[3]])][sym([b[2], b[3], b[4]])] += 1;
        }
        for i in 0..8 {
            assert_eq!(ts.pi()[i], q(1, 8));
            for j in 0..8 {
                assert_eq!(ts.matrix(a).unwrap().get(i, j), q(counts[i][j] as u64, 4));
                assert_eq!(ts.matrix(a.inverse()).unwrap().get(j, i), q(counts[i][j] as u64, 4));
            }
        }
    }

    #[test]
    fn markovize_rejects_non_invariant_input() {
        let spec = z();
        let a = spec.letter(1, false).unwrap();
        let p = vec![vec![q(1, 2), q(1, 2)], vec![q(1, 2), q(1, 2)]];
        let ts = TransitionSystem::from_dense(vec![q(1, 3), q(2, 3)], vec![(a, p.clone()), (a.inverse(), p)]).unwrap();
        let mu = MeasureSpec::TreeMarkov(ts);
        let level = CodingLevel::new(spec, Alphabet::binary(), 0).unwrap();
        assert!(matches!(markovize(&mu, &level, budget()), Err(Error::InvalidMeasure(_))));
    }

    #[test]
    fn markovize_outputs_validate() {
        for (spec, n) in [(z(), 2), (GroupSpec::group(2).unwrap(), 1), (GroupSpec::semigroup(2).unwrap(), 1)] {
            for mu in measures(&spec) {
                let level = CodingLevel::new(spec.clone(), Alphabet::binary(), n).unwrap();
                let ts = markovize(&mu, &level, budget()).unwrap();
                assert!(validate(&ts, &spec).unwrap().passed());
            }
        }
    }

    #[test]
    fn admissibility_examples() {
        let spec = z();
        let det = markovize(
            &MeasureSpec::<Q>::deterministic_chain(2, &spec).unwrap(),
            &CodingLevel::new(spec.clone(), Alphabet::binary(), 0).unwrap(),
            budget(),
        )
        .unwrap();
        let d = ball(&spec, 2);
        for p in enumerate_patterns(&d, Alphabet::binary(), budget()).unwrap() {
            let constant = p.values().iter().all(|&v| v == p.values()[0]);
            assert_eq!(admissible(&p, &det, &spec).unwrap(), constant);
        }
        assert_eq!(enumerate_admissible(&det, &spec, 3, budget()).unwrap().len(), 2);

        let level = CodingLevel::new(spec.clone(), Alphabet::binary(), 1).unwrap();
        let ts = markovize(&fair(), &level, budget()).unwrap();
        let single = Pattern::new(ball(&spec, 0), vec![3], level.l_alphabet()).unwrap();
        assert!(admissible(&single, &ts, &spec).unwrap());
        // Overlap consistency: z(a) must be z(e) shifted by one.
        let b1 = ball(&spec, 1);
        let mut count = 0;
        for p in enumerate_patterns(&b1, level.l_alphabet(), budget()).unwrap() {
            let ok = admissible(&p, &ts, &spec).unwrap();
            assert_eq!(ok, admissible_all_pairs(&p, &ts, &spec).unwrap());
            let win = |g: &str| by_exponent(&level.symbol_pattern(p.get(&Word::parse(g, &spec).unwrap()).unwrap()));
            let (e, a, ai) = (win("e"), win("a"), win("A"));
            let consistent = e[1].1 == a[0].1 && e[2].1 == a[1].1 && ai[1].1 == e[0].1 && ai[2].1 == e[1].1;
            assert_eq!(ok, consistent);
            count += usize::from(ok);
        }
        assert_eq!(count, 32);
        assert!(admissible(&Pattern::new(SiteSet::singleton(Word::parse("a", &spec).unwrap()), vec![0], level.l_alphabet()).unwrap(), &ts, &spec).is_err());
    }

    #[test]
    fn full_support_enumeration_is_everything() {
        let spec = GroupSpec::semigroup(2).unwrap();
        let ts = generic_ts(&spec);
        let set = enumerate_admissible(&ts, &spec, 2, budget()).unwrap();
        assert_eq!(set.len(), 1 << 7);
        let all: Vec<_> = enumerate_patterns(&ball(&spec, 2), Alphabet::binary(), budget()).unwrap().collect();
        assert_eq!(set.iter().collect::<Vec<_>>(), all);
        assert_eq!(admissible_count(&ts, &spec, 2).unwrap(), 128);
    }

    #[test]
    fn image_oracle_examples() {
        let spec = GroupSpec::group(2).unwrap();
        let level = CodingLevel::new(spec.clone(), Alphabet::binary(), 0).unwrap();
        let mu = MeasureSpec::tree_markov(generic_ts(&spec), &spec).unwrap();
        assert_eq!(image_oracle(&mu, &level, 1, budget()).unwrap().len(), 32);
        let det = MeasureSpec::<Q>::deterministic_chain(2, &spec).unwrap();
        let img = image_oracle(&det, &CodingLevel::new(spec.clone(), Alphabet::binary(), 1).unwrap(), 1, budget()).unwrap();
        assert_eq!(img.len(), 2);
        for p in img.iter() {
            assert!(p.values().iter().all(|&v| v == p.values()[0]));
        }

        let spec = z();
        let level = CodingLevel::new(spec.clone(), Alphabet::binary(), 1).unwrap();
        let img = image_oracle(&fair(), &level, 1, budget()).unwrap();
        assert_eq!(img.len(), 32);
        let ts = markovize(&fair(), &level, budget()).unwrap();
        assert_eq!(enumerate_admissible(&ts, &spec, 1, budget()).unwrap(), img);
    }

    #[test]
    fn reconstruction_holds_on_small_matrix() {
        for (spec, n) in [(z(), 1), (z(), 2), (GroupSpec::group(2).unwrap(), 1), (GroupSpec::semigroup(2).unwrap(), 1)] {
            for mu in measures(&spec) {
                let level = CodingLevel::new(spec.clone(), Alphabet::binary(), n).unwrap();
                let ex = check_reconstruction(&mu, &level, budget(), Strategy::Exhaustive).unwrap();
                assert!(ex.holds(), "{spec:?} n={n}");
                let red = check_reconstruction(&mu, &level, budget(), Strategy::Reduced).unwrap();
                assert!(red.holds());
                assert_eq!(ex.patterns_checked, red.patterns_checked);
            }
        }
        let level = CodingLevel::new(z(), Alphabet::binary(), 0).unwrap();
        let r = check_reconstruction(&fair(), &level, budget(), Strategy::Auto).unwrap();
        assert!(r.holds());
        assert_eq!(r.patterns_checked, 2);
    }

    #[test]
    fn strategies_agree_on_violations() {
        // A full-support system over L ignores overlaps, so reconstruction fails.
        let spec = z();
        let level = CodingLevel::new(spec.clone(), Alphabet::binary(), 1).unwrap();
        let l = level.l_size() as usize;
        let uniform = vec![vec![q(1, l as u64); l]; l];
        let ts = TransitionSystem::from_dense(
            vec![q(1, l as u64); l],
            spec.generators().into_iter().map(|s| (s, uniform.clone())).collect(),
        )
        .unwrap();
        let ex = check_reconstruction_for(&ts, &level, budget(), Strategy::Exhaustive).unwrap();
        let red = check_reconstruction_for(&ts, &level, budget(), Strategy::Reduced).unwrap();
        assert!(!ex.holds() && !red.holds());
        assert_eq!(ex.patterns_checked, 512);
        // Oracle: per pattern, each non-root site disagrees on its coordinate with probability 1/2.
        let expected: u128 = enumerate_patterns(&ball(&spec, 1), level.l_alphabet(), budget())
            .unwrap()
            .map(|p| {
                let v = p.values();
                (0..3).filter(|&f| level.coordinate(v[f], 0) != level.coordinate(v[0], f)).count() as u128
            })
            .sum();
        assert_eq!(ex.violation_count, expected);
        // Reduced counts distinct (f, z(e)(f), z(f)) triples.
        let triples: BTreeSet<(usize, u32, u32)> = enumerate_patterns(&ball(&spec, 1), level.l_alphabet(), budget())
            .unwrap()
            .flat_map(|p| {
                let v = p.values().to_vec();
                (0..3)
                    .filter(|&f| level.coordinate(v[f], 0) != level.coordinate(v[0], f))
                    .map(|f| (f, level.coordinate(v[0], f), v[f]))
                    .collect::<Vec<_>>()
            })
            .collect();
        assert_eq!(red.violation_count, triples.len() as u128);
        for v in &red.violations {
            let f = level.ball().index_of(&v.site).unwrap();
            assert!(triples.contains(&(f, level.coordinate(v.center, f), v.at_site)));
        }
    }

    #[test]
    fn budget_exhaustion_reports_completed_radius() {
        let spec = z();
        let level = CodingLevel::new(spec, Alphabet::binary(), 3).unwrap();
        let err = check_reconstruction(&fair(), &level, Budget::new(5_000).unwrap(), Strategy::Exhaustive);
        match err {
            Err(Error::BudgetExceeded { completed, .. }) => assert!(completed.is_some()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn oracle_strategies_agree() {
        for (spec, n) in [(z(), 1), (GroupSpec::group(2).unwrap(), 1), (GroupSpec::semigroup(2).unwrap(), 1)] {
            for mu in measures(&spec) {
                let level = CodingLevel::new(spec.clone(), Alphabet::binary(), n).unwrap();
                let ex = compare_with_oracle(&mu, &level, n, budget(), Strategy::Exhaustive).unwrap();
                let red = compare_with_oracle(&mu, &level, n, budget(), Strategy::Reduced).unwrap();
                assert!(ex.equal && red.equal);
                assert_eq!(ex.admissible_count, red.admissible_count);
                assert_eq!(ex.image_count, red.image_count);
            }
        }
    }

    fn and_code() -> GeneralCode {
        let spec = z();
        let w = SiteSet::new([Word::identity(), Word::parse("a", &spec).unwrap()]);
        GeneralCode::from_fn(w, Alphabet::binary(), Alphabet::binary(), |v| v[0] & v[1]).unwrap()
    }

    fn xor_code() -> GeneralCode {
        let spec = z();
        let w = SiteSet::new([Word::identity(), Word::parse("a", &spec).unwrap()]);
        GeneralCode::from_fn(w, Alphabet::binary(), Alphabet::binary(), |v| v[0] ^ v[1]).unwrap()
    }

    #[test]
    fn and_code_has_gap() {
        let spec = z();
        let code = and_code();
        let rep = support_gap_search(&fair(), &code, &spec, 4, budget()).unwrap();
        let GapOutcome::Gap { m, witness } = rep.outcome else {
            panic!("no gap")
        };
        assert_eq!(m, 1);
        // (1, 0, 1) read along a^-1, e, a.
        assert_eq!(by_exponent(&witness), vec![(-1, 1), (0, 0), (1, 1)]);
        assert_eq!(witness.values(), &[0, 1, 1]);
        let t = &rep.system;
        let a = spec.letter(1, false).unwrap();
        assert!(t.matrix(a).unwrap().get(1, 0).is_positive());
        assert!(t.matrix(a).unwrap().get(0, 1).is_positive());
        assert_eq!(brute_force_preimage(&fair(), &code, &spec, &witness, 6, budget()).unwrap(), None);
        let ok = Pattern::new(witness.domain().clone(), vec![1, 1, 1], Alphabet::binary()).unwrap();
        assert!(brute_force_preimage(&fair(), &code, &spec, &ok, 6, budget()).unwrap().is_some());
    }

    #[test]
    fn identity_xor_and_ball_codes_have_no_gap() {
        let spec = z();
        for code in [GeneralCode::identity(Alphabet::binary()), xor_code()] {
            let rep = support_gap_search(&fair(), &code, &spec, 4, budget()).unwrap();
            assert_eq!(rep.outcome, GapOutcome::NoGap { m_max: 4 });
            for (m, adm, img) in rep.rows {
                assert_eq!(adm, img);
                assert_eq!(adm, 1 << (2 * m + 1));
            }
        }
        for (spec, n) in [(z(), 1), (GroupSpec::group(2).unwrap(), 1)] {
            for mu in measures(&spec) {
                let level = CodingLevel::new(spec.clone(), Alphabet::binary(), n).unwrap();
                let code = GeneralCode::ball_code(&level);
                let rep = support_gap_search(&mu, &code, &spec, 1, budget()).unwrap();
                assert!(matches!(rep.outcome, GapOutcome::NoGap { .. }));
                assert_eq!(rep.system, markovize(&mu, &level, budget()).unwrap());
            }
        }
    }

    #[test]
    fn xor_preimages_exist_for_every_short_word() {
        let spec = z();
        let code = xor_code();
        for m in 0..=2 {
            for p in enumerate_patterns(&ball(&spec, m), Alphabet::binary(), budget()).unwrap() {
                assert!(brute_force_preimage(&fair(), &code, &spec, &p, 6, budget()).unwrap().is_some());
            }
        }
    }

    #[test]
    fn code_image_matches_marginals() {
        let spec = GroupSpec::group(2).unwrap();
        let mu = MeasureSpec::tree_markov(generic_ts(&spec), &spec).unwrap();
        let code = GeneralCode::identity(Alphabet::binary());
        let img = code_image(&mu, &code, &spec, 1, budget()).unwrap();
        for p in enumerate_patterns(&ball(&spec, 1), Alphabet::binary(), budget()).unwrap() {
            assert_eq!(img.contains(&p), marginal(&mu, &p, budget()).unwrap().is_positive());
        }
    }

    #[test]
    fn float_and_exact_markovization_agree() {
        let spec = z();
        let level = CodingLevel::new(spec.clone(), Alphabet::binary(), 1).unwrap();
        let exact = markovize(&MeasureSpec::bernoulli(vec![q(1, 4), q(3, 4)]).unwrap(), &level, budget()).unwrap();
        let float = markovize(&MeasureSpec::bernoulli(vec![0.25f64, 0.75]).unwrap(), &level, budget()).unwrap();
        for s in spec.generators() {
            for i in 0..8 {
                for j in 0..8 {
                    let e = exact.matrix(s).unwrap().get(i, j).to_f64();
                    assert!((e - float.matrix(s).unwrap().get(i, j)).abs() < 1e-12);
                }
            }
        }
    }
}
