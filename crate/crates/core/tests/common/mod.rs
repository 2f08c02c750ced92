//! Generators shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeMap;

use eci_core::causal::{InfoBase, KernelRow, Strategy};
use eci_core::models::{Atom, DiscreteDistribution};
use eci_core::Rational;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn bin(n: &str) -> (String, Vec<String>) {
    (n.to_string(), vec!["0".into(), "1".into()])
}

/// Per-variable tables of two-outcome weights.
pub type Kernels = Vec<Vec<[u64; 2]>>;

pub const STAGE_VARS: [&str; 5] = ["L1", "A1", "L2", "A2", "Y"];

pub fn two_stage_info_base() -> InfoBase {
    InfoBase::new(
        vec![vec!["L1".into()], vec!["L2".into()], vec!["Y".into()]],
        vec![vec!["A1".into()], vec!["A2".into()]],
    )
}

/// Conditional tables for `L1, A1, L2, A2, Y`, each row indexed by the
/// earlier values read as a binary number. Every entry is positive.
pub fn random_kernels(rng: &mut ChaCha8Rng) -> Kernels {
    (0..5).map(|i| (0..1usize << i).map(|_| [rng.gen_range(1..=4), rng.gen_range(1..=4)]).collect()).collect()
}

/// Joint over the five variables, multiplied out atom by atom.
pub fn materialize(kernels: &[Vec<[u64; 2]>]) -> DiscreteDistribution {
    let mut pmf = Vec::with_capacity(32);
    for code in 0..32usize {
        let bits: Vec<usize> = (0..5).map(|i| code >> (4 - i) & 1).collect();
        let mut p = Rational::one();
        for i in 0..5 {
            let row = bits[..i].iter().fold(0, |acc, &b| acc * 2 + b);
            let [a, b] = kernels[i][row];
            p = p * Rational::new(if bits[i] == 0 { a } else { b } as i128, (a + b) as i128);
        }
        pmf.push(p);
    }
    DiscreteDistribution::new(STAGE_VARS.iter().map(|n| bin(n)).collect(), pmf).unwrap()
}

/// The action tables of `kernels` as a strategy.
pub fn strategy_of(kernels: &[Vec<[u64; 2]>], label: &str) -> Strategy {
    let stage = |i: usize| -> Vec<KernelRow> {
        (0..1usize << i)
            .map(|row| {
                let history =
                    (0..i).map(|j| (STAGE_VARS[j].to_string(), (row >> (i - 1 - j) & 1).to_string())).collect();
                let [a, b] = kernels[i][row];
                let atom = |v: &str, m: u64| Atom {
                    assign: BTreeMap::from([(STAGE_VARS[i].to_string(), v.to_string())]),
                    p: Rational::new(m as i128, (a + b) as i128),
                };
                KernelRow { history, actions: vec![atom("0", a), atom("1", b)] }
            })
            .collect()
    };
    Strategy { regime: label.into(), stages: vec![stage(1), stage(3)] }
}

/// Observational kernels, and a strategy regime sharing its `L` tables.
pub fn stable_pair(rng: &mut ChaCha8Rng) -> (Kernels, Kernels) {
    let obs = random_kernels(rng);
    let fresh = random_kernels(rng);
    let mut strat = obs.clone();
    strat[1] = fresh[1].clone();
    strat[3] = fresh[3].clone();
    (obs, strat)
}
