use serde::{Deserialize, Serialize};

use super::PairTable;
use crate::model::Belief;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BonusParams {
    pub g_u: f64,
    pub g_l: f64,
    pub alpha_u: f64,
    pub alpha_l: f64,
}

impl Default for BonusParams {
    fn default() -> Self {
        BonusParams { g_u: 20.0, g_l: 20.0, alpha_u: 50.0, alpha_l: 20.0 }
    }
}

impl BonusParams {
    pub fn is_valid(&self) -> bool {
        [self.g_u, self.g_l, self.alpha_u, self.alpha_l].iter().all(|v| *v > 0.0 && v.is_finite())
    }

    /// Bonus from the two visitation totals.
    pub fn evaluate(&self, transition_total: f64, label_total: f64) -> f64 {
        if transition_total > self.alpha_u && label_total > self.alpha_l {
            0.0
        } else {
            self.g_u / (1.0 + transition_total) + self.g_l / (1.0 + label_total)
        }
    }
}

/// Bonus for MDP state `x` and its `k`-th choice. The label total sums the
/// label concentrations of every possible successor.
pub fn exploration_bonus(belief: &Belief, x: usize, k: usize, params: &BonusParams) -> f64 {
    let transition_total = belief.transition_total(x, k);
    let label_total: f64 = belief.transition_support(x, k).iter().map(|&t| belief.label_total(t)).sum();
    params.evaluate(transition_total, label_total)
}

pub fn bonus_table(belief: &Belief, params: &BonusParams) -> PairTable {
    (0..belief.num_states())
        .map(|x| (0..belief.num_choices(x)).map(|k| exploration_bonus(belief, x, k, params)).collect())
        .collect()
}
