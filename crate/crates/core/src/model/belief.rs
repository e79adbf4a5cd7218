use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use super::{LabeledMdp, ModelError};
use crate::label::LabelSet;

/// Smallest concentration any declared outcome may have.
pub const DEFAULT_PRIOR_FLOOR: f64 = 1e-3;

/// Something observed while executing: an MDP transition, a state label, or
/// both.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub stage: usize,
    /// `(x, action, x_next)`
    pub transition: Option<(usize, usize, usize)>,
    /// `(x, label)`
    pub label: Option<(usize, LabelSet)>,
}

impl Observation {
    pub fn transition(stage: usize, x: usize, action: usize, next: usize) -> Self {
        Observation { stage, transition: Some((x, action, next)), label: None }
    }

    pub fn label(stage: usize, x: usize, label: LabelSet) -> Self {
        Observation { stage, transition: None, label: Some((x, label)) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct TransitionBelief {
    action: usize,
    support: Vec<usize>,
    alpha: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct LabelBelief {
    support: Vec<LabelSet>,
    alpha: Vec<f64>,
}

/// Dirichlet concentrations over every transition distribution and every
/// label distribution of an MDP, on fixed supports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Belief {
    floor: f64,
    transitions: Vec<Vec<TransitionBelief>>,
    labels: Vec<LabelBelief>,
}

impl Belief {
    /// Builds a belief on the supports of `template`. The callbacks receive
    /// `(x, choice index, outcome index, template probability)` and
    /// `(x, outcome index, template probability)` and return concentrations.
    /// Every concentration is raised to at least `floor`.
    pub fn from_template(
        template: &LabeledMdp,
        floor: f64,
        mut transition: impl FnMut(usize, usize, usize, f64) -> f64,
        mut label: impl FnMut(usize, usize, f64) -> f64,
    ) -> Belief {
        assert!(floor > 0.0, "prior floor must be positive");
        let transitions = template
            .states
            .iter()
            .enumerate()
            .map(|(x, s)| {
                s.choices
                    .iter()
                    .enumerate()
                    .map(|(k, c)| TransitionBelief {
                        action: c.action,
                        support: c.successors.iter().map(|s| s.0).collect(),
                        alpha: c
                            .successors
                            .iter()
                            .enumerate()
                            .map(|(j, &(_, p))| transition(x, k, j, p).max(floor))
                            .collect(),
                    })
                    .collect()
            })
            .collect();
        let labels = template
            .states
            .iter()
            .enumerate()
            .map(|(x, s)| LabelBelief {
                support: s.labels.iter().map(|l| l.0).collect(),
                alpha: s
                    .labels
                    .iter()
                    .enumerate()
                    .map(|(j, &(_, p))| label(x, j, p).max(floor))
                    .collect(),
            })
            .collect();
        Belief { floor, transitions, labels }
    }

    /// Same concentration on every declared outcome.
    pub fn uniform(template: &LabeledMdp, concentration: f64) -> Belief {
        Belief::from_template(
            template,
            DEFAULT_PRIOR_FLOOR,
            |_, _, _, _| concentration,
            |_, _, _| concentration,
        )
    }

    /// Concentrations proportional to the template probabilities.
    pub fn proportional(template: &LabeledMdp, transition_strength: f64, label_strength: f64) -> Belief {
        Belief::from_template(
            template,
            DEFAULT_PRIOR_FLOOR,
            |_, _, _, p| transition_strength * p,
            |_, _, p| label_strength * p,
        )
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn num_states(&self) -> usize {
        self.labels.len()
    }

    pub fn num_choices(&self, x: usize) -> usize {
        self.transitions[x].len()
    }

    pub fn choice_action(&self, x: usize, k: usize) -> usize {
        self.transitions[x][k].action
    }

    pub fn transition_support(&self, x: usize, k: usize) -> &[usize] {
        &self.transitions[x][k].support
    }

    pub fn transition_alpha(&self, x: usize, k: usize) -> &[f64] {
        &self.transitions[x][k].alpha
    }

    pub fn transition_total(&self, x: usize, k: usize) -> f64 {
        self.transitions[x][k].alpha.iter().sum()
    }

    pub fn label_support(&self, x: usize) -> &[LabelSet] {
        &self.labels[x].support
    }

    pub fn label_alpha(&self, x: usize) -> &[f64] {
        &self.labels[x].alpha
    }

    pub fn label_total(&self, x: usize) -> f64 {
        self.labels[x].alpha.iter().sum()
    }

    /// Adds one count to each observed outcome.
    pub fn update(&mut self, obs: &Observation) -> Result<(), ModelError> {
        let mut slots: Vec<(bool, usize, usize, usize)> = Vec::new();
        if let Some((x, u, next)) = obs.transition {
            let row = self.transitions.get(x).ok_or(ModelError::StateOutOfRange(x))?;
            let k = row
                .iter()
                .position(|t| t.action == u)
                .ok_or(ModelError::UnknownChoice { state: x, action: u })?;
            let j = row[k].support.iter().position(|&s| s == next).ok_or_else(|| {
                ModelError::UnknownOutcome(format!("state {next} after action {u} in state {x}"))
            })?;
            slots.push((true, x, k, j));
        }
        if let Some((x, l)) = obs.label {
            let lb = self.labels.get(x).ok_or(ModelError::StateOutOfRange(x))?;
            let j = lb.support.iter().position(|&s| s == l).ok_or_else(|| {
                ModelError::UnknownOutcome(format!("label {:#x} in state {x}", l.0))
            })?;
            slots.push((false, x, 0, j));
        }
        for (is_transition, x, k, j) in slots {
            if is_transition {
                self.transitions[x][k].alpha[j] += 1.0;
            } else {
                self.labels[x].alpha[j] += 1.0;
            }
        }
        Ok(())
    }

    pub fn updated(&self, obs: &Observation) -> Result<Belief, ModelError> {
        let mut b = self.clone();
        b.update(obs)?;
        Ok(b)
    }

    fn check_topology(&self, template: &LabeledMdp) -> Result<(), ModelError> {
        let mismatch = |m: String| Err(ModelError::TopologyMismatch(m));
        if template.states.len() != self.labels.len() {
            return mismatch(format!(
                "{} states in model, {} in belief",
                template.states.len(),
                self.labels.len()
            ));
        }
        for (x, s) in template.states.iter().enumerate() {
            if s.choices.len() != self.transitions[x].len() {
                return mismatch(format!("state {x}: choice count differs"));
            }
            for (c, t) in s.choices.iter().zip(&self.transitions[x]) {
                if c.action != t.action
                    || c.successors.len() != t.support.len()
                    || c.successors.iter().zip(&t.support).any(|(a, b)| a.0 != *b)
                {
                    return mismatch(format!("state {x}: transition support differs"));
                }
            }
            if s.labels.len() != self.labels[x].support.len()
                || s.labels.iter().zip(&self.labels[x].support).any(|(a, b)| a.0 != *b)
            {
                return mismatch(format!("state {x}: label support differs"));
            }
        }
        Ok(())
    }

    /// The MDP whose distributions are the posterior means.
    pub fn expected_mdp(&self, template: &LabeledMdp) -> Result<LabeledMdp, ModelError> {
        self.check_topology(template)?;
        let mut out = template.clone();
        for (x, s) in out.states.iter_mut().enumerate() {
            for (c, t) in s.choices.iter_mut().zip(&self.transitions[x]) {
                let total: f64 = t.alpha.iter().sum();
                for (succ, a) in c.successors.iter_mut().zip(&t.alpha) {
                    succ.1 = a / total;
                }
            }
            let lb = &self.labels[x];
            let total: f64 = lb.alpha.iter().sum();
            for (l, a) in s.labels.iter_mut().zip(&lb.alpha) {
                l.1 = a / total;
            }
        }
        Ok(out)
    }

    /// One MDP drawn from the belief; deterministic given `seed`.
    pub fn sample_mdp(&self, template: &LabeledMdp, seed: u64) -> Result<LabeledMdp, ModelError> {
        self.check_topology(template)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = template.clone();
        for (x, s) in out.states.iter_mut().enumerate() {
            for (c, t) in s.choices.iter_mut().zip(&self.transitions[x]) {
                let p = sample_dirichlet(&t.alpha, &mut rng);
                for (succ, v) in c.successors.iter_mut().zip(p) {
                    succ.1 = v;
                }
            }
            let p = sample_dirichlet(&self.labels[x].alpha, &mut rng);
            for (l, v) in s.labels.iter_mut().zip(p) {
                l.1 = v;
            }
        }
        Ok(out)
    }
}

/// Logarithm of a Gamma(shape, 1) draw. Small shapes use the boost
/// `G(a) = G(a + 1) · U^(1/a)` so the result stays finite.
fn log_gamma_draw<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape >= 1.0 {
        let g: f64 = Gamma::new(shape, 1.0).expect("positive shape").sample(rng);
        g.ln()
    } else {
        let g: f64 = Gamma::new(shape + 1.0, 1.0).expect("positive shape").sample(rng);
        let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
        g.ln() + u.ln() / shape
    }
}

/// Draws from Dirichlet(`alpha`).
pub fn sample_dirichlet<R: Rng + ?Sized>(alpha: &[f64], rng: &mut R) -> Vec<f64> {
    if alpha.len() == 1 {
        return vec![1.0];
    }
    let logs: Vec<f64> = alpha.iter().map(|&a| log_gamma_draw(a, rng)).collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::two_state;
    use proptest::prelude::*;
    use rand::Rng;

    fn coin(alpha: [f64; 2]) -> (LabeledMdp, Belief) {
        let m = two_state();
        let b = Belief::from_template(
            &m,
            DEFAULT_PRIOR_FLOOR,
            move |x, k, j, _| if (x, k) == (0, 0) { alpha[j] } else { 1.0 },
            |_, _, _| 1.0,
        );
        (m, b)
    }

    #[test]
    fn unit_count_update() {
        let (m, b) = coin([1.0, 1.0]);
        let b = b.updated(&Observation::transition(0, 0, 0, 0)).unwrap();
        assert_eq!(b.transition_alpha(0, 0), &[2.0, 1.0]);
        let e = b.expected_mdp(&m).unwrap();
        assert!((e.states[0].choices[0].successors[0].1 - 2.0 / 3.0).abs() < 1e-12);
        assert!((e.states[0].choices[0].successors[1].1 - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn floor_is_applied_and_kept() {
        let (_, b) = coin([5.0, 0.0]);
        assert_eq!(b.transition_alpha(0, 0), &[5.0, DEFAULT_PRIOR_FLOOR]);
        let b = b.updated(&Observation::transition(0, 0, 0, 1)).unwrap();
        assert_eq!(b.transition_alpha(0, 0), &[5.0, 1.0 + DEFAULT_PRIOR_FLOOR]);
    }

    #[test]
    fn unknown_outcomes_are_rejected() {
        let (_, b) = coin([1.0, 1.0]);
        assert!(matches!(
            b.updated(&Observation::transition(0, 0, 1, 1)),
            Err(ModelError::UnknownOutcome(_))
        ));
        assert!(matches!(
            b.updated(&Observation::label(0, 0, LabelSet(1))),
            Err(ModelError::UnknownOutcome(_))
        ));
    }

    #[test]
    fn expected_probabilities() {
        let (m, b) = coin([3.0, 1.0]);
        let e = b.expected_mdp(&m).unwrap();
        assert_eq!(e.states[0].choices[0].successors, vec![(0, 0.75), (1, 0.25)]);
        e.validate().unwrap();
        let (m, b) = coin([1.0, 1.0]);
        assert_eq!(b.expected_mdp(&m).unwrap().states[0].choices[0].successors, vec![(0, 0.5), (1, 0.5)]);
    }

    #[test]
    fn concentrated_samples_are_near_the_mean() {
        let (m, b) = coin([1e9, 1e9]);
        let s = b.sample_mdp(&m, 7).unwrap();
        assert!((s.states[0].choices[0].successors[0].1 - 0.5).abs() < 1e-3);
        assert_eq!(s, b.sample_mdp(&m, 7).unwrap());
    }

    #[test]
    fn monte_carlo_mean_of_samples() {
        let (m, b) = coin([2.0, 1.0]);
        let n = 10_000;
        let mut sum = 0.0;
        for seed in 0..n {
            sum += b.sample_mdp(&m, seed).unwrap().states[0].choices[0].successors[0].1;
        }
        assert!((sum / n as f64 - 2.0 / 3.0).abs() < 0.01);
    }

    #[test]
    fn tiny_concentrations_still_sample() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let p = sample_dirichlet(&[1e-3, 1e-3, 1e-3], &mut rng);
            assert!(p.iter().all(|v| v.is_finite() && *v >= 0.0));
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn coin_posterior_converges() {
        let (m, b) = coin([1.0, 1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut b = b;
        for t in 0..1000 {
            let next = if rng.random::<f64>() < 0.7 { 0 } else { 1 };
            b.update(&Observation::transition(t, 0, 0, next)).unwrap();
        }
        let e = b.expected_mdp(&m).unwrap();
        let p = &e.states[0].choices[0].successors;
        assert!((p[0].1 - 0.7).abs() + (p[1].1 - 0.3).abs() < 0.05);
    }

    proptest! {
        #[test]
        fn update_order_does_not_matter(outcomes in proptest::collection::vec(0usize..2, 0..30), rot in 0usize..30) {
            let (_, b) = coin([1.0, 1.0]);
            let obs: Vec<Observation> = outcomes
                .iter()
                .enumerate()
                .map(|(t, &o)| Observation { stage: t, transition: Some((0, 0, o)), label: Some((1, LabelSet(o as u32))) })
                .collect();
            let mut forward = b.clone();
            for o in &obs { forward.update(o).unwrap(); }
            let mut rotated = b;
            let r = if obs.is_empty() { 0 } else { rot % obs.len() };
            for o in obs[r..].iter().chain(&obs[..r]).rev() { rotated.update(o).unwrap(); }
            prop_assert_eq!(forward, rotated);
        }

        #[test]
        fn concentrations_never_decrease(outcomes in proptest::collection::vec(0usize..2, 1..30)) {
            let (_, mut b) = coin([0.5, 2.0]);
            for (t, &o) in outcomes.iter().enumerate() {
                let before = b.clone();
                b.update(&Observation { stage: t, transition: Some((0, 0, o)), label: Some((1, LabelSet(o as u32))) }).unwrap();
                for x in 0..b.num_states() {
                    for k in 0..b.num_choices(x) {
                        for (new, old) in b.transition_alpha(x, k).iter().zip(before.transition_alpha(x, k)) {
                            prop_assert!(new >= old);
                        }
                    }
                    for (new, old) in b.label_alpha(x).iter().zip(before.label_alpha(x)) {
                        prop_assert!(new >= old);
                    }
                }
                prop_assert!(b.transition_total(0, 0) > before.transition_total(0, 0));
            }
        }

        #[test]
        fn samples_are_valid_models(a in 0.001f64..50.0, c in 0.001f64..50.0, seed in any::<u64>()) {
            let (m, b) = coin([a, c]);
            prop_assert!(b.sample_mdp(&m, seed).unwrap().validate().is_ok());
        }
    }
}
