#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};

pub struct Run {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Run {
    pub fn json(&self) -> Value {
        serde_json::from_str(&self.stdout)
            .unwrap_or_else(|e| panic!("bad JSON ({e}): {}\nstderr: {}", self.stdout, self.stderr))
    }
}

pub fn treeshift(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_treeshift"))
        .args(args)
        .output()
        .expect("binary runs");
    Run {
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
        code: out.status.code().unwrap_or(-1),
    }
}

pub fn write_json(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

pub fn generators(rank: usize, group: bool) -> Vec<String> {
    (0..rank)
        .flat_map(|i| {
            let c = (b'a' + i as u8) as char;
            let mut v = vec![c.to_string()];
            if group {
                v.push(c.to_ascii_uppercase().to_string());
            }
            v
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureKind {
    Uniform,
    Biased,
    Deterministic,
    Generic,
}

pub const MEASURES: [MeasureKind; 4] = [
    MeasureKind::Uniform,
    MeasureKind::Biased,
    MeasureKind::Deterministic,
    MeasureKind::Generic,
];

fn strs(rows: &[&[&str]]) -> Value {
    json!(rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
}

/// Full-support reversible systems; the first matrix drives `a`, the second every other
/// generator, and inverses reuse their generator's matrix.
pub fn generic_markov(k: usize, rank: usize, group: bool) -> Value {
    let (pi, first, second): (Vec<&str>, Value, Value) = if k == 2 {
        (
            vec!["1/3", "2/3"],
            strs(&[&["1/2", "1/2"], &["1/4", "3/4"]]),
            strs(&[&["1/4", "3/4"], &["3/8", "5/8"]]),
        )
    } else {
        (
            vec!["1/6", "1/3", "1/2"],
            strs(&[&["1/3", "1/3", "1/3"], &["1/6", "1/2", "1/3"], &["1/9", "2/9", "2/3"]]),
            strs(&[&["1/4", "1/2", "1/4"], &["1/4", "1/2", "1/4"], &["1/12", "1/6", "3/4"]]),
        )
    };
    let mut mats = serde_json::Map::new();
    for g in generators(rank, group) {
        let m = if g.eq_ignore_ascii_case("a") { first.clone() } else { second.clone() };
        mats.insert(g, m);
    }
    json!({"type": "tree_markov", "pi": pi, "matrices": mats})
}

pub fn measure(kind: MeasureKind, k: usize, rank: usize, group: bool) -> Value {
    match kind {
        MeasureKind::Uniform => json!({"type": "bernoulli", "p": vec![format!("1/{k}"); k]}),
        MeasureKind::Biased if k == 2 => json!({"type": "bernoulli", "p": ["1/4", "3/4"]}),
        MeasureKind::Biased => json!({"type": "bernoulli", "p": ["1/4", "1/4", "1/2"]}),
        MeasureKind::Deterministic => json!({"type": "deterministic_chain"}),
        MeasureKind::Generic => generic_markov(k, rank, group),
    }
}

pub fn config(rank: usize, group: bool, k: usize, n: usize, kind: MeasureKind) -> Value {
    json!({
        "group": {"rank": rank, "mode": if group { "group" } else { "semigroup" }},
        "alphabet": k,
        "measure": measure(kind, k, rank, group),
        "n": n,
    })
}

/// Number of reduced words of length at most `n`, summed layer by layer.
pub fn ball_size(rank: u128, group: bool, n: u32) -> u128 {
    (0..=n)
        .map(|l| match (l, group) {
            (0, _) => 1,
            (l, true) => 2 * rank * (2 * rank - 1).pow(l - 1),
            (l, false) => rank.pow(l),
        })
        .sum()
}
