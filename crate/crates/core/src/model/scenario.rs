//! JSON scenario files for explicitly enumerated models.
//!
//! ```json
//! {
//!   "ap": ["h", "b"],
//!   "actions": ["go", "stay"],
//!   "states": [
//!     { "name": "s0",
//!       "labels": [ { "label": ["h"], "p": 1.0 } ],
//!       "choices": [ { "action": "go", "cost": 3,
//!                      "successors": [ { "to": "s1", "p": 1.0 } ] } ] }
//!   ],
//!   "initial_state": "s0",
//!   "initial_label": ["h"],
//!   "home": ["s0"],
//!   "prior": { "kind": "uniform", "concentration": 1.0 }
//! }
//! ```
//!
//! Listed successors and labels are the declared supports. Probabilities
//! describe the true environment; the prior describes what the planner
//! believes before any observation.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Belief, Choice, LabeledMdp, ModelError, StateSpec};
use crate::label::LabelSet;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PriorSpec {
    /// Same concentration for every declared outcome.
    Uniform { concentration: f64 },
    /// Concentration = strength × true probability (floored).
    Proportional { transition_strength: f64, label_strength: f64 },
}

impl Default for PriorSpec {
    fn default() -> Self {
        PriorSpec::Uniform { concentration: 1.0 }
    }
}

impl PriorSpec {
    pub fn belief(&self, mdp: &LabeledMdp) -> Belief {
        match *self {
            PriorSpec::Uniform { concentration } => Belief::uniform(mdp, concentration),
            PriorSpec::Proportional { transition_strength, label_strength } => {
                Belief::proportional(mdp, transition_strength, label_strength)
            }
        }
    }

    fn validate(&self) -> Result<(), ModelError> {
        let ok = match *self {
            PriorSpec::Uniform { concentration } => concentration >= 0.0,
            PriorSpec::Proportional { transition_strength, label_strength } => {
                transition_strength >= 0.0 && label_strength >= 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(ModelError::Invalid("prior concentrations must be non-negative".into()))
        }
    }
}

#[derive(Serialize, Deserialize)]
struct LabelFile {
    label: Vec<String>,
    p: f64,
}

#[derive(Serialize, Deserialize)]
struct SuccessorFile {
    to: String,
    p: f64,
}

#[derive(Serialize, Deserialize)]
struct ChoiceFile {
    action: String,
    cost: f64,
    successors: Vec<SuccessorFile>,
}

#[derive(Serialize, Deserialize)]
struct StateFile {
    name: String,
    labels: Vec<LabelFile>,
    choices: Vec<ChoiceFile>,
}

#[derive(Serialize, Deserialize)]
struct ScenarioFile {
    ap: Vec<String>,
    actions: Vec<String>,
    states: Vec<StateFile>,
    initial_state: String,
    initial_label: Vec<String>,
    home: Vec<String>,
    #[serde(default)]
    prior: PriorSpec,
}

/// A fully enumerated environment with home states and a prior.
#[derive(Clone, Debug, PartialEq)]
pub struct ExplicitScenario {
    pub truth: LabeledMdp,
    pub home: Vec<usize>,
    pub prior: PriorSpec,
}

impl ExplicitScenario {
    pub fn prior_belief(&self) -> Belief {
        self.prior.belief(&self.truth)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.truth.validate()?;
        self.prior.validate()?;
        if self.home.is_empty() {
            return Err(ModelError::Invalid("no home states".into()));
        }
        if let Some(&h) = self.home.iter().find(|&&h| h >= self.truth.num_states()) {
            return Err(ModelError::StateOutOfRange(h));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<ExplicitScenario, ModelError> {
        let file: ScenarioFile =
            serde_json::from_str(text).map_err(|e| ModelError::Invalid(e.to_string()))?;
        ExplicitScenario::from_file(file)
    }

    pub fn from_value(value: serde_json::Value) -> Result<ExplicitScenario, ModelError> {
        let file: ScenarioFile =
            serde_json::from_value(value).map_err(|e| ModelError::Invalid(e.to_string()))?;
        ExplicitScenario::from_file(file)
    }

    fn from_file(file: ScenarioFile) -> Result<ExplicitScenario, ModelError> {
        let index: HashMap<&str, usize> =
            file.states.iter().enumerate().map(|(i, s)| (s.name.as_str(), i)).collect();
        if index.len() != file.states.len() {
            return Err(ModelError::Invalid("duplicate state names".into()));
        }
        let state = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| ModelError::Invalid(format!("unknown state `{name}`")))
        };
        let labels = |names: &[String]| {
            LabelSet::from_names(&file.ap, names).map_err(ModelError::UnknownProposition)
        };
        let mut states = Vec::with_capacity(file.states.len());
        for s in &file.states {
            let mut choices = Vec::new();
            for c in &s.choices {
                let action = file
                    .actions
                    .iter()
                    .position(|a| *a == c.action)
                    .ok_or_else(|| ModelError::Invalid(format!("unknown action `{}`", c.action)))?;
                let successors = c
                    .successors
                    .iter()
                    .map(|t| Ok((state(&t.to)?, t.p)))
                    .collect::<Result<_, ModelError>>()?;
                choices.push(Choice { action, cost: c.cost, successors });
            }
            let label_support = s
                .labels
                .iter()
                .map(|l| Ok((labels(&l.label)?, l.p)))
                .collect::<Result<_, ModelError>>()?;
            states.push(StateSpec { name: s.name.clone(), labels: label_support, choices });
        }
        let truth = LabeledMdp {
            initial_state: state(&file.initial_state)?,
            initial_label: labels(&file.initial_label)?,
            ap: file.ap,
            actions: file.actions,
            states,
        };
        let home = file.home.iter().map(|h| state(h)).collect::<Result<_, _>>()?;
        let scenario = ExplicitScenario { truth, home, prior: file.prior };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_json(&self) -> String {
        let m = &self.truth;
        let name = |i: usize| m.states[i].name.clone();
        let file = ScenarioFile {
            ap: m.ap.clone(),
            actions: m.actions.clone(),
            states: m
                .states
                .iter()
                .map(|s| StateFile {
                    name: s.name.clone(),
                    labels: s
                        .labels
                        .iter()
                        .map(|&(l, p)| LabelFile { label: l.names(&m.ap), p })
                        .collect(),
                    choices: s
                        .choices
                        .iter()
                        .map(|c| ChoiceFile {
                            action: m.actions[c.action].clone(),
                            cost: c.cost,
                            successors: c
                                .successors
                                .iter()
                                .map(|&(t, p)| SuccessorFile { to: name(t), p })
                                .collect(),
                        })
                        .collect(),
                })
                .collect(),
            initial_state: name(m.initial_state),
            initial_label: m.initial_label.names(&m.ap),
            home: self.home.iter().map(|&h| name(h)).collect(),
            prior: self.prior.clone(),
        };
        serde_json::to_string_pretty(&file).expect("scenario serializes")
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::two_state;

    #[test]
    fn json_round_trip() {
        let s = ExplicitScenario {
            truth: two_state(),
            home: vec![0],
            prior: PriorSpec::Proportional { transition_strength: 10.0, label_strength: 5.0 },
        };
        let text = s.to_json();
        assert_eq!(ExplicitScenario::from_json(&text).unwrap(), s);
    }

    #[test]
    fn unknown_names_are_errors() {
        let s = ExplicitScenario { truth: two_state(), home: vec![0], prior: PriorSpec::default() };
        let text = s.to_json().replace("\"to\": \"s1\"", "\"to\": \"nowhere\"");
        assert!(matches!(ExplicitScenario::from_json(&text), Err(ModelError::Invalid(_))));
        let text = s.to_json().replacen("\"a\"", "\"zz\"", 1);
        assert!(ExplicitScenario::from_json(&text).is_err());
    }
}
