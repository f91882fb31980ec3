//! Reduced words in free groups and free semigroups, word-metric balls, and the geodesic
//! (parent) structure of balls.
//!
//! Generators are numbered from 1 and rendered as `a, b, c, d, s5, s6, …` (`e` is the
//! identity); an inverse is written `a^-1` (or `A` on input). Sites are ordered shortlex
//! with `a < a^-1 < b < b^-1 < …`.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Group,
    Semigroup,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Group => write!(f, "group"),
            Mode::Semigroup => write!(f, "semigroup"),
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "group" => Ok(Mode::Group),
            "semigroup" => Ok(Mode::Semigroup),
            other => Err(Error::InvalidParameter(format!(
                "mode must be \"group\" or \"semigroup\", got {other:?}"
            ))),
        }
    }
}

/// Rank and mode of a free group `<s_1, …, s_r>` or free semigroup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroupSpec {
    rank: usize,
    mode: Mode,
}

impl GroupSpec {
    pub fn new(rank: usize, mode: Mode) -> Result<Self> {
        if rank == 0 {
            return Err(Error::InvalidParameter("rank must be at least 1".into()));
        }
        if rank > u16::MAX as usize {
            return Err(Error::InvalidParameter(format!("rank {rank} is too large")));
        }
        Ok(GroupSpec { rank, mode })
    }

    pub fn group(rank: usize) -> Result<Self> {
        Self::new(rank, Mode::Group)
    }

    pub fn semigroup(rank: usize) -> Result<Self> {
        Self::new(rank, Mode::Semigroup)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn is_group(&self) -> bool {
        self.mode == Mode::Group
    }

    /// The generating set `S`, in canonical letter order.
    pub fn generators(&self) -> Vec<Letter> {
        let mut out = Vec::with_capacity(2 * self.rank);
        for g in 0..self.rank as u16 {
            out.push(Letter { gen: g, inverse: false });
            if self.is_group() {
                out.push(Letter { gen: g, inverse: true });
            }
        }
        out
    }

    /// Only the positive generators `s_1, …, s_r`.
    pub fn positive_generators(&self) -> Vec<Letter> {
        (0..self.rank as u16)
            .map(|g| Letter { gen: g, inverse: false })
            .collect()
    }

    pub fn letter(&self, index: usize, inverse: bool) -> Result<Letter> {
        if index == 0 || index > self.rank {
            return Err(Error::InvalidGenerator {
                index,
                rank: self.rank,
            });
        }
        if inverse && !self.is_group() {
            return Err(Error::Malformed(format!(
                "inverse of generator {index} used in semigroup mode"
            )));
        }
        Ok(Letter {
            gen: (index - 1) as u16,
            inverse,
        })
    }

    pub fn contains_letter(&self, l: Letter) -> bool {
        (l.gen as usize) < self.rank && (self.is_group() || !l.inverse)
    }

    /// The generator element `s` as a word.
    pub fn word(&self, l: Letter) -> Word {
        Word(vec![l])
    }
}

/// A generator or its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    gen: u16,
    inverse: bool,
}

impl Letter {
    /// 1-based generator index.
    pub fn index(&self) -> usize {
        self.gen as usize + 1
    }

    pub fn is_inverse(&self) -> bool {
        self.inverse
    }

    pub fn inverse(&self) -> Letter {
        Letter {
            gen: self.gen,
            inverse: !self.inverse,
        }
    }

    fn cancels(&self, other: &Letter) -> bool {
        self.gen == other.gen && self.inverse != other.inverse
    }

    fn symbol(&self) -> String {
        if self.gen < 4 {
            ((b'a' + self.gen as u8) as char).to_string()
        } else {
            format!("s{}", self.gen + 1)
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inverse {
            write!(f, "{}^-1", self.symbol())
        } else {
            write!(f, "{}", self.symbol())
        }
    }
}

/// A reduced word. Ordered shortlex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    /// Freely reduce an arbitrary letter sequence.
    pub fn from_letters(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            match out.last() {
                Some(last) if last.cancels(&l) => {
                    out.pop();
                }
                _ => out.push(l),
            }
        }
        Word(out)
    }

    /// The reduced product `self · other`.
    pub fn mul(&self, other: &Word) -> Word {
        Word::from_letters(self.0.iter().chain(other.0.iter()).copied())
    }

    /// Group inverse. Only meaningful in group mode.
    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(Letter::inverse).collect())
    }

    pub fn pow(&self, k: i64) -> Word {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::identity();
        for _ in 0..k.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }

    /// Splits `g = t · g'` with `|g'| = |g| - 1`.
    pub fn split_first(&self) -> Option<(Letter, Word)> {
        let (&t, rest) = self.0.split_first()?;
        Some((t, Word(rest.to_vec())))
    }

    /// For the rank-one group, the exponent `j` with `self = a^j`.
    pub fn z_exponent(&self) -> Option<i64> {
        let mut j = 0i64;
        for l in &self.0 {
            if l.gen != 0 {
                return None;
            }
            j += if l.inverse { -1 } else { 1 };
        }
        Some(j)
    }

    /// Parse `e`, `ab^-1a`, `a^3`, `A` (= `a^-1`) and the like.
    pub fn parse(text: &str, spec: &GroupSpec) -> Result<Word> {
        let t: Vec<char> = text.trim().chars().filter(|c| !c.is_whitespace()).collect();
        if t.is_empty() || t == ['e'] {
            return Ok(Word::identity());
        }
        let mut letters = Vec::new();
        let mut i = 0;
        while i < t.len() {
            let c = t[i];
            let (index, inverse) = match c {
                'a'..='d' => ((c as u8 - b'a') as usize + 1, false),
                'A'..='D' => ((c as u8 - b'A') as usize + 1, true),
                's' | 'S' => {
                    let start = i + 1;
                    let mut j = start;
                    while j < t.len() && t[j].is_ascii_digit() {
                        j += 1;
                    }
                    let n: usize = t[start..j]
                        .iter()
                        .collect::<String>()
                        .parse()
                        .map_err(|_| Error::Malformed(format!("bad word {text:?}")))?;
                    i = j - 1;
                    (n, c == 'S')
                }
                _ => return Err(Error::Malformed(format!("bad word {text:?}"))),
            };
            i += 1;
            let mut exp: i64 = 1;
            if i < t.len() && t[i] == '^' {
                i += 1;
                let start = i;
                if i < t.len() && t[i] == '-' {
                    i += 1;
                }
                while i < t.len() && t[i].is_ascii_digit() {
                    i += 1;
                }
                exp = t[start..i]
                    .iter()
                    .collect::<String>()
                    .parse()
                    .map_err(|_| Error::Malformed(format!("bad exponent in {text:?}")))?;
            }
            let inv = inverse ^ (exp < 0);
            let l = spec.letter(index, inv)?;
            for _ in 0..exp.unsigned_abs() {
                letters.push(l);
            }
        }
        Ok(Word::from_letters(letters))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        let mut i = 0;
        while i < self.0.len() {
            let l = self.0[i];
            let mut run = 1;
            while i + run < self.0.len() && self.0[i + run] == l {
                run += 1;
            }
            let sym = l.symbol();
            match (run, l.inverse) {
                (1, false) => write!(f, "{sym}")?,
                (k, false) => write!(f, "{sym}^{k}")?,
                (k, true) => write!(f, "{sym}^-{k}")?,
            }
            i += run;
        }
        Ok(())
    }
}

/// Reduce a raw letter sequence given as `(1-based index, inverse?)` pairs.
pub fn reduce(letters: &[(usize, bool)], spec: &GroupSpec) -> Result<Word> {
    let ls = letters
        .iter()
        .map(|&(i, inv)| spec.letter(i, inv))
        .collect::<Result<Vec<_>>>()?;
    Ok(Word::from_letters(ls))
}

/// A finite set of sites in canonical shortlex order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SiteSet(Arc<[Word]>);

impl SiteSet {
    pub fn new(words: impl IntoIterator<Item = Word>) -> Self {
        let mut v: Vec<Word> = words.into_iter().collect();
        v.sort();
        v.dedup();
        SiteSet(v.into())
    }

    pub fn empty() -> Self {
        SiteSet(Vec::new().into())
    }

    pub fn singleton(w: Word) -> Self {
        SiteSet(vec![w].into())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn words(&self) -> &[Word] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Word> {
        self.0.iter()
    }

    pub fn index_of(&self, w: &Word) -> Option<usize> {
        self.0.binary_search(w).ok()
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.index_of(w).is_some()
    }

    pub fn is_subset(&self, other: &SiteSet) -> bool {
        self.0.iter().all(|w| other.contains(w))
    }

    pub fn union(&self, other: &SiteSet) -> SiteSet {
        SiteSet::new(self.0.iter().chain(other.0.iter()).cloned())
    }

    pub fn intersection(&self, other: &SiteSet) -> SiteSet {
        SiteSet::new(self.0.iter().filter(|w| other.contains(w)).cloned())
    }

    /// `{ w · g : w ∈ self }`.
    pub fn right_translate(&self, g: &Word) -> SiteSet {
        SiteSet::new(self.0.iter().map(|w| w.mul(g)))
    }

    /// `{ f · g : f ∈ self, g ∈ other }`.
    pub fn product(&self, other: &SiteSet) -> SiteSet {
        SiteSet::new(
            self.0
                .iter()
                .flat_map(|f| other.0.iter().map(move |g| f.mul(g))),
        )
    }

    /// Largest word length, or `None` for the empty set.
    pub fn radius(&self) -> Option<usize> {
        self.0.last().map(Word::len)
    }

    /// The smallest set containing `self` and `e` that is closed under dropping the first
    /// letter, i.e. under passing to the geodesic predecessor.
    pub fn suffix_hull(&self) -> SiteSet {
        let mut all = vec![Word::identity()];
        for w in self.0.iter() {
            for k in 0..w.len() {
                all.push(Word(w.0[k..].to_vec()));
            }
        }
        SiteSet::new(all)
    }

    pub fn is_suffix_closed(&self) -> bool {
        self.0
            .iter()
            .all(|w| w.split_first().is_none_or(|(_, rest)| self.contains(&rest)))
    }
}

impl fmt::Display for SiteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, w) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{w}")?;
        }
        write!(f, "}}")
    }
}

impl<'a> IntoIterator for &'a SiteSet {
    type Item = &'a Word;
    type IntoIter = std::slice::Iter<'a, Word>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// `B(e, n) = { g : |g| ≤ n }`.
pub fn ball(spec: &GroupSpec, n: usize) -> SiteSet {
    let gens = spec.generators();
    let mut all = vec![Word::identity()];
    let mut frontier = vec![Word::identity()];
    for _ in 0..n {
        let mut next = Vec::new();
        for w in &frontier {
            for &t in &gens {
                if let Some(first) = w.0.first() {
                    if first.cancels(&t) {
                        continue;
                    }
                }
                let mut letters = Vec::with_capacity(w.len() + 1);
                letters.push(t);
                letters.extend_from_slice(&w.0);
                next.push(Word(letters));
            }
        }
        all.extend(next.iter().cloned());
        frontier = next;
    }
    SiteSet::new(all)
}

/// Closed-form size of `B(e, n)`.
pub fn ball_size(spec: &GroupSpec, n: usize) -> u128 {
    let r = spec.rank() as u128;
    let n32 = n as u32;
    match spec.mode() {
        Mode::Group if r == 1 => 2 * n as u128 + 1,
        Mode::Group => 1 + 2 * r * ((2 * r - 1).pow(n32) - 1) / (2 * r - 2),
        Mode::Semigroup if r == 1 => n as u128 + 1,
        Mode::Semigroup => (r.pow(n32 + 1) - 1) / (r - 1),
    }
}

/// `(f_1, …, f_{m+1})` with `f_1 = f`, `f_{m+1} = e` and `f_{i-1} = t_{i-1} f_i`.
pub fn geodesic_suffixes(f: &Word) -> Vec<Word> {
    (0..=f.len()).map(|i| Word(f.0[i..].to_vec())).collect()
}

/// `B(f, n) = B(e, n) · f`.
pub fn left_ball(spec: &GroupSpec, f: &Word, n: usize) -> SiteSet {
    ball(spec, n).right_translate(f)
}

/// Right-invariant word metric `d(g, h) = |g h^{-1}|`.
pub fn distance(g: &Word, h: &Word) -> usize {
    g.mul(&h.inverse()).len()
}

/// Geodesic predecessors of the sites of a suffix-closed set: `site = generator · parent`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParentStructure {
    sites: SiteSet,
    parents: Vec<Option<(Letter, usize)>>,
}

impl ParentStructure {
    pub fn sites(&self) -> &SiteSet {
        &self.sites
    }

    /// `(t, index of g')` for the site at `index`; `None` for the identity.
    pub fn parent(&self, index: usize) -> Option<(Letter, usize)> {
        self.parents[index]
    }

    pub fn parent_of(&self, g: &Word) -> Option<(Letter, &Word)> {
        let i = self.sites.index_of(g)?;
        self.parents[i].map(|(t, p)| (t, &self.sites.words()[p]))
    }

    /// Tree edges `(parent index, child index, generator)`, children in canonical order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, Letter)> + '_ {
        self.parents
            .iter()
            .enumerate()
            .filter_map(|(c, p)| p.map(|(t, pi)| (pi, c, t)))
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().filter(|p| p.is_some()).count()
    }
}

/// Builds the geodesic spanning tree of `sites`, which must contain `e` and be closed under
/// geodesic predecessors (every ball is).
pub fn parent_structure(sites: &SiteSet, spec: &GroupSpec) -> Result<ParentStructure> {
    if !sites.contains(&Word::identity()) {
        return Err(Error::MalformedBall("identity is missing".into()));
    }
    let mut parents = Vec::with_capacity(sites.len());
    for w in sites.iter() {
        if w.0.iter().any(|&l| !spec.contains_letter(l)) {
            return Err(Error::MalformedBall(format!(
                "site {w} uses a letter outside the generating set"
            )));
        }
        match w.split_first() {
            None => parents.push(None),
            Some((t, rest)) => match sites.index_of(&rest) {
                Some(p) => parents.push(Some((t, p))),
                None => {
                    return Err(Error::MalformedBall(format!(
                        "site {w} present but its predecessor {rest} is not"
                    )))
                }
            },
        }
    }
    Ok(ParentStructure {
        sites: sites.clone(),
        parents,
    })
}
