use std::collections::VecDeque;

use super::policy::{Diagnostics, Policy, PolicyKind};
use super::{pair_value, PairTable};
use crate::product::Product;

const TIE: f64 = 1e-12;

/// Steps to the home set along positive-probability edges; `usize::MAX`
/// where the home set is unreachable.
fn home_layers(p: &Product) -> Vec<usize> {
    let n = p.num_states();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (s, cs) in p.choices.iter().enumerate() {
        for c in cs {
            for &(t, pr) in &c.successors {
                if pr > 0.0 && t != s {
                    preds[t].push(s);
                }
            }
        }
    }
    let mut layer = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for s in 0..n {
        if p.home[s] {
            layer[s] = 0;
            queue.push_back(s);
        }
    }
    while let Some(t) = queue.pop_front() {
        for &s in &preds[t] {
            if layer[s] == usize::MAX {
                layer[s] = layer[t] + 1;
                queue.push_back(s);
            }
        }
    }
    layer
}

/// Penalized probability of reaching home and the greedy return policy.
///
/// Value iteration from zero on `p2` (home absorbing):
/// `v(s) = 1` on home states and otherwise
/// `v(s) = clamp(max_u σ(s,u) + Σ p(s,u,s') v(s'), 0, 1)`.
/// Ties in the greedy choice go to the action that makes more progress
/// towards home, then to the lowest action id.
pub fn return_value_function(p2: &Product, sigma: &PairTable, tol: f64) -> (Vec<f64>, Policy) {
    let n = p2.num_states();
    let mut v: Vec<f64> = (0..n).map(|s| if p2.home[s] { 1.0 } else { 0.0 }).collect();
    let q = |v: &[f64], s: usize, k: usize| {
        let c = &p2.choices[s][k];
        pair_value(sigma, p2, s, c) + c.successors.iter().map(|&(t, pr)| pr * v[t]).sum::<f64>()
    };
    let max_sweeps = 100_000;
    for _ in 0..max_sweeps {
        let mut delta: f64 = 0.0;
        for s in 0..n {
            if p2.home[s] {
                continue;
            }
            let best = (0..p2.choices[s].len()).map(|k| q(&v, s, k)).fold(f64::NEG_INFINITY, f64::max);
            let new = best.clamp(0.0, 1.0);
            delta = delta.max((new - v[s]).abs());
            v[s] = new;
        }
        if delta < tol {
            break;
        }
    }

    let layer = home_layers(p2);
    let progress = |s: usize, k: usize| -> f64 {
        p2.choices[s][k]
            .successors
            .iter()
            .map(|&(t, pr)| pr * if layer[t] == usize::MAX { n as f64 } else { layer[t] as f64 })
            .sum()
    };
    let dist = (0..n)
        .map(|s| {
            if p2.home[s] || p2.choices[s].is_empty() {
                return Vec::new();
            }
            let qs: Vec<f64> = (0..p2.choices[s].len()).map(|k| q(&v, s, k).min(1.0)).collect();
            let best = qs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let pick = (0..qs.len())
                .filter(|&k| qs[k] >= best - TIE)
                .min_by(|&a, &b| {
                    progress(s, a)
                        .total_cmp(&progress(s, b))
                        .then(p2.choices[s][a].action.cmp(&p2.choices[s][b].action))
                })
                .expect("non-empty");
            vec![(pick, 1.0)]
        })
        .collect();
    (v, Policy { kind: PolicyKind::Return, dist, diagnostics: Diagnostics::default() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::LabelSet;
    use crate::product::BuildOptions;
    use crate::product::{make_variant, AmecSet, Variant};

    fn chain() -> Product {
        // 0 --a--> {1: home 0.5, 2: dead 0.5}; 3 loops next to home.
        use crate::ltl::{compile_fragment_dra, parse_ltl};
        use crate::model::{Choice, LabeledMdp, StateSpec};
        let st = |name: &str, choices: Vec<Choice>| StateSpec {
            name: name.into(),
            labels: vec![(LabelSet(0), 1.0)],
            choices,
        };
        let mdp = LabeledMdp {
            ap: vec!["a".into()],
            actions: vec!["a".into(), "b".into()],
            states: vec![
                st("s", vec![Choice { action: 0, cost: 1.0, successors: vec![(1, 0.5), (2, 0.5)] }]),
                st("home", vec![Choice { action: 0, cost: 1.0, successors: vec![(1, 1.0)] }]),
                st("dead", vec![Choice { action: 0, cost: 1.0, successors: vec![(2, 1.0)] }]),
                st(
                    "loop",
                    vec![
                        Choice { action: 0, cost: 1.0, successors: vec![(3, 1.0)] },
                        Choice { action: 1, cost: 1.0, successors: vec![(1, 1.0)] },
                    ],
                ),
            ],
            initial_state: 0,
            initial_label: LabelSet(0),
        };
        let dra = compile_fragment_dra(&parse_ltl("[]<>a").unwrap()).unwrap();
        let p = crate::product::build_product(&mdp, &dra, &[1], &BuildOptions { enumerate_all: true, ..BuildOptions::default() }).unwrap();
        make_variant(&p, Variant::P2, &AmecSet::default()).unwrap()
    }

    fn zeros(p: &Product) -> PairTable {
        vec![vec![0.0; 2]; p.states.iter().map(|s| s.x).max().unwrap() + 1]
    }

    #[test]
    fn home_dead_and_chain_values() {
        let p = chain();
        let (v, pi) = return_value_function(&p, &zeros(&p), 1e-12);
        for s in 0..p.num_states() {
            let expected = match p.states[s].x {
                0 => 0.5,
                1 | 3 => 1.0,
                _ => 0.0,
            };
            assert!((v[s] - expected).abs() < 1e-9, "state {s}: {}", v[s]);
        }
        // The self-loop also has value one; progress breaks the tie.
        let s3 = (0..p.num_states()).find(|&s| p.states[s].x == 3).unwrap();
        let k = pi.mode(s3).unwrap();
        assert_eq!(p.choices[s3][k].action, 1);
    }

    #[test]
    fn correction_lowers_values() {
        let p = chain();
        let mut sigma = zeros(&p);
        sigma[0][0] = -0.1;
        let (v, _) = return_value_function(&p, &sigma, 1e-12);
        let s0 = p.initial;
        assert!((v[s0] - 0.4).abs() < 1e-9);
    }
}
