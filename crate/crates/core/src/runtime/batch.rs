use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::executor::{online_execute, ExecutorConfig, RunRecord, RunStatus, RunTimings};
use super::grid::{GridConfig, GridScenario};
use super::world::World;
use super::RuntimeError;
use crate::ltl::Dra;

pub const CASE_STUDY_FORMULA: &str = "[]!o && [](h -> (!w) U b) && []<>b && []<>w && []<>h";

/// A batch experiment on generated grids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub formula: String,
    pub runs: usize,
    pub seed: u64,
    pub grid: GridConfig,
    pub executor: ExecutorConfig,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            formula: CASE_STUDY_FORMULA.to_string(),
            runs: 100,
            seed: 0,
            grid: GridConfig::default(),
            executor: ExecutorConfig::default(),
        }
    }
}

impl EvalConfig {
    /// Map seed of the `i`-th run.
    pub fn run_seed(&self, i: usize) -> u64 {
        let mut z = self.seed.wrapping_add((i as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.runs).map(|i| self.run_seed(i)).collect()
    }
}

/// SHA-256 of the canonical JSON form of `value`, hex encoded.
pub fn config_hash<T: Serialize>(value: &T) -> String {
    let json = serde_json::to_string(value).expect("configurations serialize");
    let digest = Sha256::digest(json.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub runs: usize,
    pub baseline: bool,
    /// Fraction of return activations that reached home.
    pub safety: f64,
    /// Fraction of runs with an accepting lasso.
    pub satisfiability: f64,
    pub trapped: usize,
    pub fallbacks: usize,
    pub mean_stages: f64,
    pub max_product_states: usize,
    pub max_product_edges: usize,
    pub max_lp_variables: usize,
    pub max_lp_constraints: usize,
    /// Mean seconds per synthesis call spent building the product.
    pub product_secs_per_solve: f64,
    /// Mean seconds per synthesis call spent in the programs.
    pub lp_secs_per_solve: f64,
    pub total_secs: f64,
}

#[derive(Clone, Debug)]
pub struct BatchResult {
    pub records: Vec<RunRecord>,
    pub timings: Vec<RunTimings>,
    pub summary: BatchSummary,
}

/// Activation stage of a run, uniform over `1..=max_stages`.
pub fn activation_stage(seed: u64, max_stages: usize) -> usize {
    ChaCha8Rng::seed_from_u64(seed ^ 0xac71_7a7e).random_range(1..=max_stages)
}

/// One run per seed, each on the grid generated from that seed.
pub fn evaluate_batch(
    grid: &GridConfig,
    dra: &Dra,
    exec: &ExecutorConfig,
    seeds: &[u64],
    config_hash: &str,
) -> Result<BatchResult, RuntimeError> {
    evaluate_worlds(|seed| Ok(GridScenario::generate(grid, seed)?.world()), dra, exec, seeds, config_hash)
}

/// One run per seed on the world `make_world(seed)`, with a return
/// activation at [`activation_stage`].
pub fn evaluate_worlds<F>(
    make_world: F,
    dra: &Dra,
    exec: &ExecutorConfig,
    seeds: &[u64],
    config_hash: &str,
) -> Result<BatchResult, RuntimeError>
where
    F: Fn(u64) -> Result<World, RuntimeError> + Sync,
{
    let results: Vec<Result<(RunRecord, RunTimings), RuntimeError>> = seeds
        .par_iter()
        .map(|&seed| {
            let world = make_world(seed)?;
            let act = activation_stage(seed, exec.max_stages);
            let (mut rec, t) = online_execute(&world, dra, exec, seed, Some(act))?;
            rec.config_hash = config_hash.to_string();
            Ok((rec, t))
        })
        .collect();
    let mut records = Vec::with_capacity(seeds.len());
    let mut timings = Vec::with_capacity(seeds.len());
    for r in results {
        let (rec, t) = r?;
        records.push(rec);
        timings.push(t);
    }
    let summary = summarize(&records, &timings, exec.synthesis.baseline);
    Ok(BatchResult { records, timings, summary })
}

pub fn summarize(records: &[RunRecord], timings: &[RunTimings], baseline: bool) -> BatchSummary {
    let n = records.len().max(1) as f64;
    let solves = records.iter().map(|r| r.stats.solves + r.stats.fallbacks).sum::<usize>().max(1) as f64;
    let max = |f: fn(&RunRecord) -> usize| records.iter().map(f).max().unwrap_or(0);
    BatchSummary {
        runs: records.len(),
        baseline,
        safety: records.iter().filter(|r| r.return_run.as_ref().is_some_and(|x| x.reached_home)).count() as f64 / n,
        satisfiability: records.iter().filter(|r| r.status == RunStatus::Accepted).count() as f64 / n,
        trapped: records.iter().filter(|r| r.status == RunStatus::Trapped).count(),
        fallbacks: records.iter().map(|r| r.stats.fallbacks).sum(),
        mean_stages: records.iter().map(|r| r.stages.len() as f64).sum::<f64>() / n,
        max_product_states: max(|r| r.stats.max_product_states),
        max_product_edges: max(|r| r.stats.max_product_edges),
        max_lp_variables: max(|r| r.stats.max_lp_variables),
        max_lp_constraints: max(|r| r.stats.max_lp_constraints),
        product_secs_per_solve: timings.iter().map(|t| t.product_secs).sum::<f64>() / solves,
        lp_secs_per_solve: timings.iter().map(|t| t.lp_secs).sum::<f64>() / solves,
        total_secs: timings.iter().map(|t| t.total_secs).sum(),
    }
}

/// Table-shaped comparison of batch summaries, one row per method.
pub fn summary_csv(summaries: &[BatchSummary]) -> String {
    let mut out = String::from(
        "method,runs,product_states,product_edges,lp_variables,lp_constraints,product_secs,lp_secs,safety,satisfiability,trapped,fallbacks,total_secs\n",
    );
    for s in summaries {
        out.push_str(&format!(
            "{},{},{},{},{},{},{:.4},{:.4},{:.3},{:.3},{},{},{:.1}\n",
            if s.baseline { "baseline" } else { "proposed" },
            s.runs,
            s.max_product_states,
            s.max_product_edges,
            s.max_lp_variables,
            s.max_lp_constraints,
            s.product_secs_per_solve,
            s.lp_secs_per_solve,
            s.safety,
            s.satisfiability,
            s.trapped,
            s.fallbacks,
            s.total_secs,
        ));
    }
    out
}

/// One CSV row per run.
pub fn metrics_csv(records: &[RunRecord], timings: &[RunTimings]) -> String {
    let mut out = String::from(
        "config_hash,seed,method,status,stages,activation,returned,return_steps,solves,fallbacks,product_states,lp_variables,product_secs,lp_secs,total_secs\n",
    );
    for (r, t) in records.iter().zip(timings) {
        let (act, ok, steps) = match &r.return_run {
            Some(x) => (x.activation.to_string(), x.reached_home.to_string(), x.steps.to_string()),
            None => (String::new(), String::new(), String::new()),
        };
        let status = serde_json::to_value(r.status).expect("status serializes");
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{:.3},{:.3},{:.3}\n",
            r.config_hash,
            r.seed,
            if r.baseline { "baseline" } else { "proposed" },
            status.as_str().unwrap_or_default(),
            r.stages.len(),
            act,
            ok,
            steps,
            r.stats.solves,
            r.stats.fallbacks,
            r.stats.max_product_states,
            r.stats.max_lp_variables,
            t.product_secs,
            t.lp_secs,
            t.total_secs,
        ));
    }
    out
}
