use std::collections::HashMap;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::world::World;
use super::RuntimeError;
use crate::label::LabelSet;
use crate::lasso::Lasso;
use crate::ltl::Dra;
use crate::model::{Belief, Observation};
use crate::product::{
    build_product, compute_amecs, make_variant, split_goal_states, AmecSet, BuildOptions, Product, ProductState,
    Variant,
};
use crate::synth::{
    bonus_table, exploration_bonus, return_value_function, synth_prefix, synth_suffix, BonusParams,
    CorrectionCache, Policy, SynthError, SynthesisConfig,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExecutorConfig {
    pub synthesis: SynthesisConfig,
    pub bonus: BonusParams,
    pub max_stages: usize,
    /// Re-plan every this many stages; a stale plan is also replaced when
    /// it stops covering the current state.
    pub resynthesis_period: usize,
    /// Step budget of a return activation.
    pub return_budget: usize,
}

impl Default for ExecutorConfig {
    fn default() -> Self {
        ExecutorConfig {
            synthesis: SynthesisConfig::default(),
            bonus: BonusParams::default(),
            max_stages: 150,
            resynthesis_period: 1,
            return_budget: 100,
        }
    }
}

impl ExecutorConfig {
    pub fn validate(&self) -> Result<(), RuntimeError> {
        self.synthesis.validate()?;
        if !self.bonus.is_valid() {
            return Err(RuntimeError::Config("bonus parameters must be positive".into()));
        }
        if self.resynthesis_period == 0 || self.max_stages == 0 {
            return Err(RuntimeError::Config("stage limit and resynthesis period must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepPolicy {
    Prefix,
    Suffix,
    /// Synthesis failed mid-run; the return policy was used instead.
    Fallback,
    Return,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: usize,
    pub state: String,
    pub label: Vec<String>,
    pub dra_state: usize,
    pub action: String,
    pub policy: StepPolicy,
    pub resynthesized: bool,
    pub bonus: f64,
    pub belief: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    /// A run segment that closes an accepting lasso was observed.
    Accepted,
    /// Home is unreachable from the current state under the true dynamics.
    Trapped,
    StageLimit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReturnRecord {
    pub activation: usize,
    pub reached_home: bool,
    pub steps: usize,
    pub path: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SynthesisStats {
    pub solves: usize,
    pub fallbacks: usize,
    pub max_product_states: usize,
    pub max_product_edges: usize,
    pub max_lp_variables: usize,
    pub max_lp_constraints: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub baseline: bool,
    pub config_hash: String,
    pub status: RunStatus,
    /// Stages `[start, end)` of the accepting cycle.
    pub lasso: Option<(usize, usize)>,
    pub return_run: Option<ReturnRecord>,
    pub stats: SynthesisStats,
    pub stages: Vec<StageRecord>,
}

/// Wall-clock measurements, kept out of [`RunRecord`] so records are
/// reproducible byte for byte.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunTimings {
    pub total_secs: f64,
    /// Product, components, correction terms and return values.
    pub product_secs: f64,
    /// Occupancy programs.
    pub lp_secs: f64,
    pub synthesis_secs: f64,
    pub return_secs: f64,
}

struct Plan {
    product: Product,
    policy: Policy,
    kind: StepPolicy,
    at: usize,
    /// Return values, kept for fallback plans.
    values: Vec<f64>,
}

/// Online loop: observe, update the belief, re-plan, act.
pub struct Executor<'a> {
    world: &'a World,
    dra: &'a Dra,
    cfg: &'a ExecutorConfig,
    belief: Belief,
    cache: CorrectionCache,
    rng: ChaCha8Rng,
    x: usize,
    label: LabelSet,
    q: usize,
    stage: usize,
    plan: Option<Plan>,
    entered: Option<usize>,
    visits: HashMap<ProductState, (usize, usize)>,
    letters: Vec<LabelSet>,
    stages: Vec<StageRecord>,
    stats: SynthesisStats,
    timings: RunTimings,
    lasso: Option<(usize, usize)>,
}

fn digest(belief: &Belief) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |v: f64| {
        for b in v.to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    };
    for x in 0..belief.num_states() {
        for k in 0..belief.num_choices(x) {
            belief.transition_alpha(x, k).iter().for_each(|&a| eat(a));
        }
        belief.label_alpha(x).iter().for_each(|&a| eat(a));
    }
    format!("{h:016x}")
}

impl<'a> Executor<'a> {
    pub fn new(world: &'a World, dra: &'a Dra, cfg: &'a ExecutorConfig, seed: u64) -> Result<Self, RuntimeError> {
        cfg.validate()?;
        let rng = ChaCha8Rng::seed_from_u64(seed);
        let x = world.truth.initial_state;
        let label = world.truth.initial_label;
        Ok(Executor {
            world,
            dra,
            cfg,
            belief: world.prior.clone(),
            cache: CorrectionCache::new(cfg.synthesis.n_sigma, seed ^ 0x5eed_c0de),
            rng,
            x,
            label,
            q: dra.initial(),
            stage: 0,
            plan: None,
            entered: None,
            visits: HashMap::new(),
            letters: Vec::new(),
            stages: Vec::new(),
            stats: SynthesisStats::default(),
            timings: RunTimings::default(),
            lasso: None,
        })
    }

    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn state(&self) -> usize {
        self.x
    }

    pub fn belief(&self) -> &Belief {
        &self.belief
    }

    pub fn current(&self) -> ProductState {
        ProductState { x: self.x, label: self.label, q: self.q }
    }

    fn observe_labels(&mut self) -> Result<(), RuntimeError> {
        let readings = self.world.sense(self.x, self.label, &mut self.rng);
        for (x, l) in readings {
            self.belief.update(&Observation::label(self.stage, x, l))?;
        }
        Ok(())
    }

    fn expected_product(&self, belief: &Belief) -> Result<Product, RuntimeError> {
        let mdp = belief.expected_mdp(&self.world.truth)?;
        let options = BuildOptions { start: Some(self.current()), ..BuildOptions::default() };
        Ok(build_product(&mdp, self.dra, &self.world.home, &options)?)
    }

    fn synthesize(&mut self) -> Result<Plan, RuntimeError> {
        let started = Instant::now();
        let product = self.expected_product(&self.belief)?;
        self.stats.max_product_states = self.stats.max_product_states.max(product.num_states());
        self.stats.max_product_edges = self.stats.max_product_edges.max(product.num_edges());
        let amecs = compute_amecs(&product);
        let sigma = self.cache.refresh(&self.belief).0.clone();
        let xi = bonus_table(&self.belief, &self.cfg.bonus);
        let p2 = make_variant(&product, Variant::P2, &amecs)?;
        let (v, ret) = return_value_function(&p2, &sigma, self.cfg.synthesis.vi_tolerance);
        let s = product.initial;
        let component = amecs.component_of(product.num_states())[s];
        let built = started.elapsed().as_secs_f64();
        self.timings.product_secs += built;
        let syn = &self.cfg.synthesis;
        let outcome: Result<(Product, Policy, StepPolicy), SynthError> = if amecs.is_empty() {
            Err(SynthError::Infeasible {
                bound: crate::synth::Bound::Satisfiability,
                detail: "no accepting end component under the current belief".into(),
            })
        } else if let Some(c) = component {
            let split = split_goal_states(&product, &amecs.components[c]);
            synth_suffix(&product, &split, &v, &sigma, &xi, syn, s).map(|p| (product.clone(), p, StepPolicy::Suffix))
        } else {
            let p1 = make_variant(&product, Variant::P1, &amecs)?;
            synth_prefix(&p1, &v, &sigma, &xi, syn, s).map(|p| (p1, p, StepPolicy::Prefix))
        };
        let total = started.elapsed().as_secs_f64();
        self.timings.lp_secs += total - built;
        self.timings.synthesis_secs += total;
        match outcome {
            Ok((prod, policy, kind)) => {
                self.stats.solves += 1;
                self.stats.max_lp_variables = self.stats.max_lp_variables.max(policy.diagnostics.variables);
                self.stats.max_lp_constraints = self.stats.max_lp_constraints.max(policy.diagnostics.constraints);
                if kind == StepPolicy::Suffix && self.entered.is_none() {
                    self.entered = Some(self.stage);
                }
                Ok(Plan { product: prod, policy, kind, at: self.stage, values: Vec::new() })
            }
            Err(e) if self.stage == 0 => Err(RuntimeError::Synthesis { stage: 0, source: e }),
            Err(_) => {
                self.stats.fallbacks += 1;
                Ok(Plan { product, policy: ret, kind: StepPolicy::Fallback, at: self.stage, values: v })
            }
        }
    }

    fn plan_index(&self) -> Option<usize> {
        let plan = self.plan.as_ref()?;
        if self.stage - plan.at >= self.cfg.resynthesis_period {
            return None;
        }
        let s = plan.product.lookup(self.current())?;
        let covered = plan.policy.covers(s) || plan.kind == StepPolicy::Fallback;
        if !covered || (plan.kind == StepPolicy::Prefix && plan.product.absorbing[s]) {
            return None;
        }
        Some(s)
    }

    /// Runs one stage. Returns the terminal status once the run is over.
    pub fn step(&mut self) -> Result<Option<RunStatus>, RuntimeError> {
        if let Some(status) = self.status() {
            return Ok(Some(status));
        }
        self.observe_labels()?;
        let (s, resynthesized) = match self.plan_index() {
            Some(s) => (s, false),
            None => {
                let plan = self.synthesize()?;
                let s = plan.product.lookup(self.current()).expect("plan is built around the current state");
                self.plan = Some(plan);
                (s, true)
            }
        };
        let plan = self.plan.as_ref().expect("plan present");
        let k = match plan.policy.sample(s, &mut self.rng) {
            Some(k) => k,
            // At home the return policy has nothing to do; keep to the
            // choice with the best return value, counting successors in an
            // avoid set of the automaton as lost.
            None if plan.kind == StepPolicy::Fallback => {
                let lost = |t: usize| {
                    let st = &plan.product.states[t];
                    let next = self.dra.step(st.q, self.dra.letter_from(st.label, &self.world.truth.ap));
                    self.dra.pairs().iter().any(|pr| pr.avoid.contains(&st.q) || pr.avoid.contains(&next))
                };
                let score = |k: usize| -> f64 {
                    plan.product.choices[s][k]
                        .successors
                        .iter()
                        .filter(|&&(t, _)| !lost(t))
                        .map(|&(t, p)| p * plan.values[t])
                        .sum()
                };
                (0..plan.product.choices[s].len())
                    .max_by(|&a, &b| score(a).total_cmp(&score(b)).then(b.cmp(&a)))
                    .ok_or(RuntimeError::Uncovered { stage: self.stage })?
            }
            None => return Err(RuntimeError::Uncovered { stage: self.stage }),
        };
        let choice = &plan.product.choices[s][k];
        let (action, mdp_choice, kind) = (choice.action, choice.mdp_choice, plan.kind);
        let bonus = exploration_bonus(&self.belief, self.x, mdp_choice, &self.cfg.bonus);
        self.stages.push(StageRecord {
            stage: self.stage,
            state: self.world.state_name(self.x).to_string(),
            label: self.label.names(&self.world.truth.ap),
            dra_state: self.q,
            action: self.world.truth.actions[action].clone(),
            policy: kind,
            resynthesized,
            bonus,
            belief: digest(&self.belief),
        });
        self.advance(action, mdp_choice)?;
        self.detect_lasso();
        Ok(self.status())
    }

    fn advance(&mut self, action: usize, mdp_choice: usize) -> Result<(), RuntimeError> {
        let next = self.world.draw_successor(self.x, mdp_choice, &mut self.rng);
        let letter = self.dra.letter_from(self.label, &self.world.truth.ap);
        self.letters.push(letter);
        self.q = self.dra.step(self.q, letter);
        self.belief.update(&Observation::transition(self.stage, self.x, action, next))?;
        self.x = next;
        self.label = self.world.draw_label(next, &mut self.rng);
        self.stage += 1;
        Ok(())
    }

    fn detect_lasso(&mut self) {
        let Some(entered) = self.entered else { return };
        if self.lasso.is_some() {
            return;
        }
        let t2 = self.stage;
        let key = self.current();
        if let Some(&(first, last)) = self.visits.get(&key) {
            for t1 in [first, last] {
                if t1 < entered || t1 >= t2 {
                    continue;
                }
                let word = Lasso::new(self.letters[..t1].to_vec(), self.letters[t1..t2].to_vec());
                if self.dra.accepts(&word) {
                    self.lasso = Some((t1, t2));
                    return;
                }
            }
            self.visits.insert(key, (first, t2));
        } else {
            self.visits.insert(key, (t2, t2));
        }
    }

    pub fn status(&self) -> Option<RunStatus> {
        if self.lasso.is_some() {
            Some(RunStatus::Accepted)
        } else if !self.world.can_return[self.x] {
            Some(RunStatus::Trapped)
        } else if self.stage >= self.cfg.max_stages {
            Some(RunStatus::StageLimit)
        } else {
            None
        }
    }

    /// Switches a copy of the current state to the return policy and runs
    /// it until home is reached or the budget is spent. The main run is not
    /// affected.
    pub fn activate_return(&self, seed: u64) -> Result<ReturnRecord, RuntimeError> {
        let mut belief = self.belief.clone();
        let mut cache = self.cache.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut x, mut label, mut q) = (self.x, self.label, self.q);
        let mut path = vec![self.world.state_name(x).to_string()];
        let mut steps = 0;
        let activation = self.stage;
        let empty = AmecSet::default();
        let reached = loop {
            if self.world.is_home(x) {
                break true;
            }
            if !self.world.can_return[x] || steps >= self.cfg.return_budget {
                break false;
            }
            for (y, l) in self.world.sense(x, label, &mut rng) {
                belief.update(&Observation::label(activation + steps, y, l))?;
            }
            let mdp = belief.expected_mdp(&self.world.truth)?;
            let options =
                BuildOptions { start: Some(ProductState { x, label, q }), ..BuildOptions::default() };
            let product = build_product(&mdp, self.dra, &self.world.home, &options)?;
            let p2 = make_variant(&product, Variant::P2, &empty)?;
            let sigma = cache.refresh(&belief).0;
            let (_, policy) = return_value_function(&p2, sigma, self.cfg.synthesis.vi_tolerance);
            let s = p2.initial;
            let k = policy.sample(s, &mut rng).ok_or(RuntimeError::Uncovered { stage: activation + steps })?;
            let choice = &p2.choices[s][k];
            let next = self.world.draw_successor(x, choice.mdp_choice, &mut rng);
            belief.update(&Observation::transition(activation + steps, x, choice.action, next))?;
            q = self.dra.step(q, self.dra.letter_from(label, &self.world.truth.ap));
            x = next;
            label = self.world.draw_label(x, &mut rng);
            path.push(self.world.state_name(x).to_string());
            steps += 1;
        };
        Ok(ReturnRecord { activation, reached_home: reached, steps, path })
    }

    pub fn finish(self, seed: u64, baseline: bool, return_run: Option<ReturnRecord>) -> (RunRecord, RunTimings) {
        let status = self.status().unwrap_or(RunStatus::StageLimit);
        (
            RunRecord {
                seed,
                baseline,
                config_hash: String::new(),
                status,
                lasso: self.lasso,
                return_run,
                stats: self.stats,
                stages: self.stages,
            },
            self.timings,
        )
    }
}

/// Runs one episode. When `activation` is given, a return is activated at
/// that stage, or at termination if the run ends first.
pub fn online_execute(
    world: &World,
    dra: &Dra,
    cfg: &ExecutorConfig,
    seed: u64,
    activation: Option<usize>,
) -> Result<(RunRecord, RunTimings), RuntimeError> {
    let started = Instant::now();
    let mut exec = Executor::new(world, dra, cfg, seed)?;
    let mut return_run = None;
    let mut return_secs = 0.0;
    let return_seed = seed ^ 0x0072_6574_7572_6e00;
    loop {
        if let Some(a) = activation {
            if return_run.is_none() && (exec.stage() >= a || exec.status().is_some()) {
                let t = Instant::now();
                return_run = Some(exec.activate_return(return_seed)?);
                return_secs += t.elapsed().as_secs_f64();
            }
        }
        if exec.step()?.is_some() {
            if let (Some(_), None) = (activation, &return_run) {
                let t = Instant::now();
                return_run = Some(exec.activate_return(return_seed)?);
                return_secs += t.elapsed().as_secs_f64();
            }
            break;
        }
    }
    let (record, mut timings) = exec.finish(seed, cfg.synthesis.baseline, return_run);
    timings.return_secs = return_secs;
    timings.total_secs = started.elapsed().as_secs_f64();
    Ok((record, timings))
}
