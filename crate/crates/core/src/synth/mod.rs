//! Exploration bonuses, correction terms, the return value function and the
//! prefix/suffix occupancy-measure programs.

mod bonus;
mod correction;
pub mod lp;
mod policy;
mod prefix;
mod suffix;
mod value;

pub use bonus::{bonus_table, exploration_bonus, BonusParams};
pub use correction::{correction_term, CorrectionCache};
pub use policy::{Diagnostics, Policy, PolicyKind};
pub use prefix::synth_prefix;
pub use suffix::{suffix_mean_cost, synth_suffix};
pub use value::return_value_function;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::product::{Product, ProductChoice};

/// Per MDP `(state, choice index)` values, shaped like the MDP's choices.
pub type PairTable = Vec<Vec<f64>>;

/// Value of a per-pair table for a product choice; bookkeeping self-loops of
/// absorbing states read as zero.
pub fn pair_value(table: &PairTable, product: &Product, s: usize, choice: &ProductChoice) -> f64 {
    if product.absorbing[s] {
        0.0
    } else {
        table[product.states[s].x][choice.mdp_choice]
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SafetyScope {
    /// Constrain the action distribution at the current state only.
    FirstStep,
    /// Constrain every state with positive occupancy.
    #[default]
    AllStates,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthesisConfig {
    pub chi_o: f64,
    pub chi_r: f64,
    pub n_sigma: usize,
    pub vi_tolerance: f64,
    pub lp_tolerance: f64,
    pub cost_floor: f64,
    pub safety_scope: SafetyScope,
    /// Drop every safety constraint (comparison mode).
    pub baseline: bool,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            chi_o: 0.9,
            chi_r: 0.8,
            n_sigma: 1000,
            vi_tolerance: 1e-9,
            lp_tolerance: 1e-7,
            cost_floor: 1e-6,
            safety_scope: SafetyScope::AllStates,
            baseline: false,
        }
    }
}

impl SynthesisConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::Config(m.to_string()));
        if !(self.chi_o > 0.0 && self.chi_o <= 1.0) {
            return bad("chi_o must lie in (0, 1]");
        }
        if !(self.chi_r > 0.0 && self.chi_r <= 1.0) {
            return bad("chi_r must lie in (0, 1]");
        }
        if self.n_sigma < 100 {
            return bad("n_sigma must be at least 100");
        }
        if !(self.cost_floor > 0.0) {
            return bad("cost_floor must be positive");
        }
        if !(self.vi_tolerance > 0.0 && self.lp_tolerance > 0.0) {
            return bad("tolerances must be positive");
        }
        Ok(())
    }
}

/// Which requirement made a program infeasible.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bound {
    Satisfiability,
    Safety,
}

impl std::fmt::Display for Bound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Bound::Satisfiability => write!(f, "satisfiability bound chi_o"),
            Bound::Safety => write!(f, "safety bound chi_r"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("infeasible: {bound} cannot be met ({detail})")]
    Infeasible { bound: Bound, detail: String },
    #[error("unbounded program: check the cost model")]
    Unbounded,
    #[error("state {0} is not covered by the program")]
    StateNotCovered(usize),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(String),
}
