#![allow(dead_code)]

use num_traits::{One, Zero};
use proptest::prelude::*;
use treeshift::measures::{MeasureSpec, TransitionSystem};
use treeshift::{GroupSpec, Rational, Scalar};

pub fn q(n: u64, d: u64) -> Rational {
    Rational::ratio(n, d)
}

/// A reversible system from stationary weights and one symmetric proposal per generator pair:
/// `P_ij = w_ij / M · min(1, π_j / π_i)` off the diagonal, the rest on the diagonal.
pub fn metropolis(spec: &GroupSpec, pi_weights: &[u64], proposals: &[Vec<Vec<u64>>]) -> TransitionSystem<Rational> {
    let k = pi_weights.len();
    let total: u64 = pi_weights.iter().sum();
    let pi: Vec<Rational> = pi_weights.iter().map(|&w| q(w, total)).collect();
    let mut mats = Vec::new();
    for (i, s) in spec.positive_generators().into_iter().enumerate() {
        let w = &proposals[i % proposals.len()];
        let m = (0..k).map(|a| (0..k).map(|b| w[a.min(b)][a.max(b)]).sum::<u64>()).max().unwrap().max(1);
        let mut p = vec![vec![Rational::zero(); k]; k];
        for a in 0..k {
            let mut off = Rational::zero();
            for b in 0..k {
                if a != b {
                    let ratio = (pi[b].clone() / pi[a].clone()).min(Rational::one());
                    p[a][b] = q(w[a.min(b)][a.max(b)], m) * ratio;
                    off += p[a][b].clone();
                }
            }
            p[a][a] = Rational::one() - off;
        }
        if spec.is_group() {
            mats.push((s.inverse(), p.clone()));
        }
        mats.push((s, p));
    }
    TransitionSystem::from_dense(pi, mats).unwrap()
}

/// Valid tree-Markov measures with rational parameters, some with zero transitions.
pub fn markov_measure(spec: GroupSpec, k: usize) -> impl Strategy<Value = MeasureSpec<Rational>> {
    let r = spec.rank();
    (
        prop::collection::vec(1u64..6, k),
        prop::collection::vec(prop::collection::vec(prop::collection::vec(0u64..4, k), k), r),
    )
        .prop_map(move |(pi, props)| MeasureSpec::tree_markov(metropolis(&spec, &pi, &props), &spec).unwrap())
}

pub fn bernoulli(k: usize) -> impl Strategy<Value = MeasureSpec<Rational>> {
    prop::collection::vec(0u64..5, k)
        .prop_filter("nonzero", |w| w.iter().any(|&x| x > 0))
        .prop_map(|w| {
            let t: u64 = w.iter().sum();
            MeasureSpec::bernoulli(w.iter().map(|&x| q(x, t)).collect()).unwrap()
        })
}

pub fn measure(spec: GroupSpec, k: usize) -> impl Strategy<Value = MeasureSpec<Rational>> {
    prop_oneof![bernoulli(k), markov_measure(spec, k)]
}
