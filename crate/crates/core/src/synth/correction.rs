use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use rayon::prelude::*;

use super::PairTable;
use crate::model::Belief;

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn pair_seed(seed: u64, x: usize, k: usize) -> u64 {
    mix(mix(seed ^ mix(x as u64)) ^ (k as u64))
}

/// Draws of one Dirichlet marginal, `Beta(a_j, Σa − a_j)`; a single-outcome
/// support is constant one.
fn marginal_draws(alpha: &[f64], j: usize, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    if alpha.len() == 1 {
        return vec![1.0; n];
    }
    let total: f64 = alpha.iter().sum();
    let rest = (total - alpha[j]).max(f64::MIN_POSITIVE);
    let beta = Beta::new(alpha[j], rest).expect("positive parameters");
    (0..n).map(|_| beta.sample(rng)).collect()
}

/// Monte-Carlo estimate of the correction term for MDP state `x` and its
/// `k`-th choice.
///
/// Every product successor `(x', l')` contributes the mean of
/// `min(0, p − E p)` over `n` draws of `p = p_D(x') · p_L(x', l')`, with the
/// two factors drawn from independent Beta marginals.
pub fn correction_term(belief: &Belief, x: usize, k: usize, n: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(pair_seed(seed, x, k));
    let alpha = belief.transition_alpha(x, k);
    let total_d: f64 = alpha.iter().sum();
    let mut sigma = 0.0;
    for (j, &next) in belief.transition_support(x, k).iter().enumerate() {
        let mean_d = alpha[j] / total_d;
        let d_draws = marginal_draws(alpha, j, n, &mut rng);
        let label_alpha = belief.label_alpha(next);
        let total_l: f64 = label_alpha.iter().sum();
        for i in 0..label_alpha.len() {
            let mean = mean_d * label_alpha[i] / total_l;
            let l_draws = marginal_draws(label_alpha, i, n, &mut rng);
            let acc: f64 = d_draws.iter().zip(&l_draws).map(|(d, l)| (d * l - mean).min(0.0)).sum();
            sigma += acc / n as f64;
        }
    }
    sigma.min(0.0)
}

/// Correction terms for every MDP pair, recomputed only where the
/// concentrations they depend on have changed.
#[derive(Clone, Debug, Default)]
pub struct CorrectionCache {
    keys: Vec<Vec<f64>>,
    values: PairTable,
    n: usize,
    seed: u64,
}

impl CorrectionCache {
    pub fn new(n: usize, seed: u64) -> Self {
        CorrectionCache { keys: Vec::new(), values: Vec::new(), n, seed }
    }

    /// Concentrations only grow, so this total changes exactly when an
    /// input of the term changes.
    fn key(belief: &Belief, x: usize, k: usize) -> f64 {
        belief.transition_total(x, k)
            + belief.transition_support(x, k).iter().map(|&t| belief.label_total(t)).sum::<f64>()
    }

    /// Brings the table up to date and returns it with the number of
    /// recomputed entries.
    pub fn refresh(&mut self, belief: &Belief) -> (&PairTable, usize) {
        if self.keys.len() != belief.num_states() {
            self.keys = (0..belief.num_states()).map(|x| vec![f64::NAN; belief.num_choices(x)]).collect();
            self.values = (0..belief.num_states()).map(|x| vec![0.0; belief.num_choices(x)]).collect();
        }
        let stale: Vec<(usize, usize, f64)> = (0..belief.num_states())
            .flat_map(|x| (0..belief.num_choices(x)).map(move |k| (x, k)))
            .filter_map(|(x, k)| {
                let key = Self::key(belief, x, k);
                (self.keys[x][k] != key).then_some((x, k, key))
            })
            .collect();
        let (n, seed) = (self.n, self.seed);
        let fresh: Vec<f64> = stale.par_iter().map(|&(x, k, _)| correction_term(belief, x, k, n, seed)).collect();
        for (&(x, k, key), v) in stale.iter().zip(fresh) {
            self.keys[x][k] = key;
            self.values[x][k] = v;
        }
        (&self.values, stale.len())
    }

    pub fn table(&self) -> &PairTable {
        &self.values
    }
}
