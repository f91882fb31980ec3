//! JSON run configuration.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use treeshift::measures::{MeasureSpec, TransitionSystem};
use treeshift::scalar::parse_rational;
use treeshift::{Alphabet, Budget, ExactMeasure, GroupSpec, Mode, Rational, Unit, Word, DEFAULT_BUDGET};

use crate::error::{input, CliError, CliResult};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupConfig {
    pub rank: usize,
    pub mode: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureConfig {
    Bernoulli {
        p: Vec<String>,
    },
    /// `matrices` maps generator names ("a", "A", "b", ...) to row-major matrices.
    TreeMarkov {
        pi: Vec<String>,
        matrices: BTreeMap<String, Vec<Vec<String>>>,
    },
    /// Uniform `pi` and identity transitions.
    DeterministicChain,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub group: GroupConfig,
    pub alphabet: usize,
    pub measure: MeasureConfig,
    #[serde(default)]
    pub n: usize,
    pub m: Option<usize>,
    pub budget: Option<u64>,
    pub unit: Option<String>,
}

/// A validated configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub spec: GroupSpec,
    pub alphabet: Alphabet,
    pub measure: ExactMeasure,
    pub n: usize,
    pub m: Option<usize>,
    pub budget: Budget,
    pub unit: Unit,
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| input(format!("{}: {e}", path.display())))
}

pub fn rational(text: &str) -> CliResult<Rational> {
    parse_rational(text).map_err(|e| input(format!("bad rational {text:?}: {e}")))
}

fn rationals(v: &[String]) -> CliResult<Vec<Rational>> {
    v.iter().map(|s| rational(s)).collect()
}

pub fn group_spec(rank: usize, mode: &str) -> CliResult<GroupSpec> {
    let mode: Mode = mode.parse().map_err(|e: treeshift::Error| input(e.to_string()))?;
    Ok(GroupSpec::new(rank, mode)?)
}

/// Builds the system as written, without checking invariance.
pub fn transition_system(
    pi: &[String],
    matrices: &BTreeMap<String, Vec<Vec<String>>>,
    spec: &GroupSpec,
) -> CliResult<TransitionSystem<Rational>> {
    let mut mats = Vec::new();
    for (name, rows) in matrices {
        let w = Word::parse(name, spec)?;
        let [letter] = w.letters() else {
            return Err(input(format!("matrix key {name:?} is not a single generator")));
        };
        let rows = rows.iter().map(|r| rationals(r)).collect::<CliResult<Vec<_>>>()?;
        mats.push((*letter, rows));
    }
    Ok(TransitionSystem::from_dense(rationals(pi)?, mats)?)
}

pub fn measure(cfg: &MeasureConfig, spec: &GroupSpec, k: usize) -> CliResult<ExactMeasure> {
    let mu = match cfg {
        MeasureConfig::Bernoulli { p } => MeasureSpec::bernoulli(rationals(p)?)?,
        MeasureConfig::TreeMarkov { pi, matrices } => {
            MeasureSpec::tree_markov(transition_system(pi, matrices, spec)?, spec)?
        }
        MeasureConfig::DeterministicChain => MeasureSpec::deterministic_chain(k, spec)?,
    };
    if mu.alphabet().size() != k {
        return Err(input(format!(
            "measure is over {} symbols but the alphabet has {k}",
            mu.alphabet().size()
        )));
    }
    Ok(mu)
}

impl RunConfig {
    pub fn from_raw(raw: RawConfig) -> CliResult<Self> {
        let spec = group_spec(raw.group.rank, &raw.group.mode)?;
        let alphabet = Alphabet::new(raw.alphabet)?;
        let measure = measure(&raw.measure, &spec, raw.alphabet)?;
        let budget = Budget::new(raw.budget.unwrap_or(DEFAULT_BUDGET))?;
        let unit = raw.unit.as_deref().unwrap_or("bits").parse()?;
        Ok(RunConfig {
            spec,
            alphabet,
            measure,
            n: raw.n,
            m: raw.m,
            budget,
            unit,
        })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        Self::from_raw(read_json(path)?)
    }
}
