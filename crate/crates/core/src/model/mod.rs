//! Probabilistically-labeled MDPs and Dirichlet beliefs over them.

mod belief;
mod scenario;

pub use belief::{sample_dirichlet, Belief, Observation, DEFAULT_PRIOR_FLOOR};
pub use scenario::{ExplicitScenario, PriorSpec};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::label::LabelSet;
use crate::lasso::Lasso;

/// Absolute tolerance for distribution sums.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("model has no states")]
    Empty,
    #[error("state {0} out of range")]
    StateOutOfRange(usize),
    #[error("state {state}: action {action} out of range")]
    ActionOutOfRange { state: usize, action: usize },
    #[error("state {state}: action `{action}` listed twice")]
    DuplicateAction { state: usize, action: String },
    #[error("state {state} has no allowed action")]
    NoActions { state: usize },
    #[error("state {state}, action `{action}`: cost {cost} is not strictly positive")]
    NonPositiveCost { state: usize, action: String, cost: f64 },
    #[error("state {state}, action `{action}`: successor probabilities sum to {sum}")]
    TransitionSum { state: usize, action: String, sum: f64 },
    #[error("state {state}: label probabilities sum to {sum}")]
    LabelSum { state: usize, sum: f64 },
    #[error("state {state}: empty support")]
    EmptySupport { state: usize },
    #[error("state {state}: negative or non-finite probability")]
    BadProbability { state: usize },
    #[error("initial label is not in the label support of the initial state")]
    InitialLabel,
    #[error("state {state}: no choice for action {action}")]
    UnknownChoice { state: usize, action: usize },
    #[error("outcome not in the declared support: {0}")]
    UnknownOutcome(String),
    #[error("belief does not match the model topology: {0}")]
    TopologyMismatch(String),
    #[error("lasso cycle is empty")]
    EmptyCycle,
    #[error("label references unknown proposition `{0}`")]
    UnknownProposition(String),
    #[error("{0}")]
    Invalid(String),
}

/// One allowed action of a state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Choice {
    /// Index into [`LabeledMdp::actions`].
    pub action: usize,
    pub cost: f64,
    /// Declared support with probabilities.
    pub successors: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateSpec {
    pub name: String,
    /// Declared label support with probabilities.
    pub labels: Vec<(LabelSet, f64)>,
    pub choices: Vec<Choice>,
}

/// Probabilistically-labeled MDP.
///
/// Supports are part of the structure: an entry with probability zero is
/// still a declared outcome. Labels are [`LabelSet`] masks over `ap`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledMdp {
    pub ap: Vec<String>,
    pub actions: Vec<String>,
    pub states: Vec<StateSpec>,
    pub initial_state: usize,
    pub initial_label: LabelSet,
}

impl LabeledMdp {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn choice(&self, state: usize, action: usize) -> Option<&Choice> {
        self.states.get(state)?.choices.iter().find(|c| c.action == action)
    }

    pub fn choice_index(&self, state: usize, action: usize) -> Option<usize> {
        self.states.get(state)?.choices.iter().position(|c| c.action == action)
    }

    /// Number of (state, action) pairs.
    pub fn num_pairs(&self) -> usize {
        self.states.iter().map(|s| s.choices.len()).sum()
    }

    /// Number of positive-probability transitions.
    pub fn num_edges(&self) -> usize {
        self.states
            .iter()
            .flat_map(|s| &s.choices)
            .map(|c| c.successors.iter().filter(|(_, p)| *p > 0.0).count())
            .sum()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.states.is_empty() {
            return Err(ModelError::Empty);
        }
        let n = self.states.len();
        if self.initial_state >= n {
            return Err(ModelError::StateOutOfRange(self.initial_state));
        }
        for (x, s) in self.states.iter().enumerate() {
            if s.labels.is_empty() {
                return Err(ModelError::EmptySupport { state: x });
            }
            check_distribution(s.labels.iter().map(|l| l.1))
                .map_err(|sum| ModelError::LabelSum { state: x, sum })?;
            if s.choices.is_empty() {
                return Err(ModelError::NoActions { state: x });
            }
            let mut seen = vec![false; self.actions.len()];
            for c in &s.choices {
                if c.action >= self.actions.len() {
                    return Err(ModelError::ActionOutOfRange { state: x, action: c.action });
                }
                let name = self.actions[c.action].clone();
                if std::mem::replace(&mut seen[c.action], true) {
                    return Err(ModelError::DuplicateAction { state: x, action: name });
                }
                if !(c.cost > 0.0 && c.cost.is_finite()) {
                    return Err(ModelError::NonPositiveCost { state: x, action: name, cost: c.cost });
                }
                if c.successors.is_empty() {
                    return Err(ModelError::EmptySupport { state: x });
                }
                if let Some(&(t, _)) = c.successors.iter().find(|(t, _)| *t >= n) {
                    return Err(ModelError::StateOutOfRange(t));
                }
                check_distribution(c.successors.iter().map(|s| s.1))
                    .map_err(|sum| ModelError::TransitionSum { state: x, action: name, sum })?;
            }
        }
        if !self.states[self.initial_state]
            .labels
            .iter()
            .any(|(l, _)| *l == self.initial_label)
        {
            return Err(ModelError::InitialLabel);
        }
        Ok(())
    }

    /// Average cost of the cycle of a lasso run of `(state, action)` pairs.
    pub fn mean_total_cost(&self, run: &Lasso<(usize, usize)>) -> Result<f64, ModelError> {
        if run.cycle.is_empty() {
            return Err(ModelError::EmptyCycle);
        }
        let mut total = 0.0;
        for &(x, u) in &run.cycle {
            let c = self
                .choice(x, u)
                .ok_or(ModelError::UnknownChoice { state: x, action: u })?;
            total += c.cost;
        }
        Ok(total / run.cycle.len() as f64)
    }
}

/// Ok if the values are finite, non-negative and sum to one. Returns the
/// sum otherwise (NaN for bad entries).
fn check_distribution(values: impl Iterator<Item = f64>) -> Result<(), f64> {
    let mut sum = 0.0;
    for v in values {
        if !(v.is_finite() && v >= 0.0) {
            return Err(f64::NAN);
        }
        sum += v;
    }
    if (sum - 1.0).abs() <= NORMALIZATION_TOLERANCE {
        Ok(())
    } else {
        Err(sum)
    }
}
