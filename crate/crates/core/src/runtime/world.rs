use rand::Rng;

use super::grid::GridScenario;
use super::RuntimeError;
use crate::label::LabelSet;
use crate::model::{Belief, ExplicitScenario, LabeledMdp, ModelError};

/// How label observations are produced.
#[derive(Clone, Debug, PartialEq)]
pub enum Sensor {
    /// The label of the occupied state, without error.
    Own,
    /// The windowed sensor of a grid scenario.
    Grid(Box<GridScenario>),
}

/// The true environment, the planner's prior and the home set.
#[derive(Clone, Debug, PartialEq)]
pub struct World {
    pub truth: LabeledMdp,
    pub prior: Belief,
    pub home: Vec<usize>,
    pub sensor: Sensor,
    /// States from which home is reachable under the true dynamics.
    pub can_return: Vec<bool>,
}

impl World {
    pub fn new(truth: LabeledMdp, prior: Belief, home: Vec<usize>, sensor: Sensor) -> Result<World, RuntimeError> {
        truth.validate()?;
        prior.expected_mdp(&truth)?;
        let n = truth.num_states();
        if home.is_empty() {
            return Err(RuntimeError::Model(ModelError::Invalid("no home states".into())));
        }
        if let Some(&h) = home.iter().find(|&&h| h >= n) {
            return Err(RuntimeError::Model(ModelError::StateOutOfRange(h)));
        }
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (x, s) in truth.states.iter().enumerate() {
            for c in &s.choices {
                for &(t, p) in &c.successors {
                    if p > 0.0 {
                        preds[t].push(x);
                    }
                }
            }
        }
        let mut can_return = vec![false; n];
        let mut stack = home.clone();
        for &h in &home {
            can_return[h] = true;
        }
        while let Some(t) = stack.pop() {
            for &x in &preds[t] {
                if !can_return[x] {
                    can_return[x] = true;
                    stack.push(x);
                }
            }
        }
        Ok(World { truth, prior, home, sensor, can_return })
    }

    pub fn from_explicit(scenario: &ExplicitScenario) -> Result<World, RuntimeError> {
        scenario.validate()?;
        World::new(scenario.truth.clone(), scenario.prior_belief(), scenario.home.clone(), Sensor::Own)
    }

    pub fn is_home(&self, x: usize) -> bool {
        self.home.contains(&x)
    }

    /// Draws the true label of `x`.
    pub fn draw_label<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> LabelSet {
        let labels = &self.truth.states[x].labels;
        if labels.len() == 1 {
            return labels[0].0;
        }
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for &(l, p) in labels {
            acc += p;
            if u < acc {
                return l;
            }
        }
        labels.iter().rev().find(|l| l.1 > 0.0).map_or(labels[0].0, |l| l.0)
    }

    /// Draws the successor of `x` under its `k`-th choice.
    pub fn draw_successor<R: Rng + ?Sized>(&self, x: usize, k: usize, rng: &mut R) -> usize {
        let succ = &self.truth.states[x].choices[k].successors;
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for &(t, p) in succ {
            acc += p;
            if u < acc {
                return t;
            }
        }
        succ.iter().rev().find(|s| s.1 > 0.0).map_or(succ[0].0, |s| s.0)
    }

    /// Label readings available at `x`, whose current true label is `label`.
    pub fn sense<R: Rng + ?Sized>(&self, x: usize, label: LabelSet, rng: &mut R) -> Vec<(usize, LabelSet)> {
        match &self.sensor {
            Sensor::Own => vec![(x, label)],
            Sensor::Grid(g) => g.sense(x, rng),
        }
    }

    pub fn state_name(&self, x: usize) -> &str {
        &self.truth.states[x].name
    }
}
