//! Partition and sliding-block code files.

use serde::Deserialize;
use treeshift::coding::GeneralCode;
use treeshift::patterns::{alpha_join_over_ball, join_all, pn_partition, translate_partition};
use treeshift::{Alphabet, Budget, GroupSpec, SiteSet, WindowPartition, Word};

use crate::error::{input, CliResult};

/// A window partition, described structurally.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PartitionFile {
    /// The time-zero partition `α`, window `{e}`.
    Alpha,
    /// `α^n`, the join of `gα` over `g ∈ B(e,n)`.
    BallJoin { n: usize },
    /// `P_n` on the binary full shift over `ℤ`.
    Pn { n: usize },
    /// Every pattern on the window is its own cell.
    Full { window: Vec<String> },
    /// `labels[i]` is the cell of the `i`-th window pattern in canonical order.
    Explicit { window: Vec<String>, labels: Vec<u32> },
    Translate { by: String, of: Box<PartitionFile> },
    Join { parts: Vec<PartitionFile> },
}

fn site_set(words: &[String], spec: &GroupSpec) -> CliResult<SiteSet> {
    let parsed = words
        .iter()
        .map(|w| Word::parse(w, spec))
        .collect::<treeshift::Result<Vec<_>>>()?;
    let set = SiteSet::new(parsed.iter().cloned());
    if set.len() != parsed.len() {
        return Err(input("window lists a site twice"));
    }
    Ok(set)
}

impl PartitionFile {
    pub fn build(&self, spec: &GroupSpec, alphabet: Alphabet, budget: Budget) -> CliResult<WindowPartition> {
        Ok(match self {
            PartitionFile::Alpha => WindowPartition::alpha(alphabet),
            PartitionFile::BallJoin { n } => {
                alpha_join_over_ball(&WindowPartition::alpha(alphabet), spec, *n, budget)?
            }
            PartitionFile::Pn { n } => {
                if spec.rank() != 1 || !spec.is_group() || alphabet.size() != 2 {
                    return Err(input("pn partitions need the rank-one group and a binary alphabet"));
                }
                pn_partition(*n, budget)?
            }
            PartitionFile::Full { window } => {
                WindowPartition::full(site_set(window, spec)?, alphabet, budget)?
            }
            PartitionFile::Explicit { window, labels } => {
                WindowPartition::new(site_set(window, spec)?, alphabet, labels.clone())?
            }
            PartitionFile::Translate { by, of } => {
                translate_partition(&of.build(spec, alphabet, budget)?, &Word::parse(by, spec)?, budget)?
            }
            PartitionFile::Join { parts } => {
                let built = parts
                    .iter()
                    .map(|p| p.build(spec, alphabet, budget))
                    .collect::<CliResult<Vec<_>>>()?;
                join_all(&built, budget)?
            }
        })
    }
}

/// `map` pairs a window pattern, one digit per window site in canonical order, with a
/// target symbol.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeFile {
    pub window: Vec<String>,
    pub target_size: usize,
    pub map: Vec<(String, String)>,
}

fn digits(text: &str, base: usize) -> CliResult<Vec<u32>> {
    text.chars()
        .map(|c| {
            c.to_digit(10)
                .filter(|&d| (d as usize) < base)
                .ok_or_else(|| input(format!("bad symbol {c:?} in {text:?}")))
        })
        .collect()
}

impl CodeFile {
    pub fn build(&self, spec: &GroupSpec, source: Alphabet) -> CliResult<GeneralCode> {
        if source.size() > 10 || self.target_size > 10 {
            return Err(input("code files support alphabets of at most 10 symbols"));
        }
        let window = site_set(&self.window, spec)?;
        let target = Alphabet::new(self.target_size)?;
        let total = source.size().checked_pow(window.len() as u32).filter(|&t| t <= 1 << 20);
        let total = total.ok_or_else(|| input("code window too large"))?;
        let mut table = vec![None; total];
        for (key, value) in &self.map {
            let k = digits(key, source.size())?;
            if k.len() != window.len() {
                return Err(input(format!("code key {key:?} does not match the window")));
            }
            let idx = k.iter().fold(0usize, |acc, &d| acc * source.size() + d as usize);
            let v = digits(value, self.target_size)?;
            let [v] = v[..] else {
                return Err(input(format!("code value {value:?} must be a single symbol")));
            };
            if table[idx].replace(v).is_some() {
                return Err(input(format!("code key {key:?} appears twice")));
            }
        }
        let map = table
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| input("code map is not total on the window patterns"))?;
        Ok(GeneralCode::new(window, source, target, map)?)
    }
}
