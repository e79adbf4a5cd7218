//! Experiment configuration, scenario files and task loading.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use safeplan::ltl::{compile_fragment_dra, import_dra, parse_ltl, Dra};
use safeplan::model::ExplicitScenario;
use safeplan::runtime::{config_hash, EvalConfig, ExecutorConfig, GridConfig, GridScenario, RuntimeError, World};

use crate::error::CliError;

/// Contents of a `--config` TOML file. Every field is optional; command-line
/// flags override it.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Experiment {
    pub scenario: Option<PathBuf>,
    pub formula: Option<String>,
    pub dra: Option<PathBuf>,
    pub runs: Option<usize>,
    pub seed: Option<u64>,
    /// Stage of the return request in `run`; the end of the run if unset.
    pub activate: Option<usize>,
    pub out: Option<PathBuf>,
    pub grid: GridConfig,
    pub executor: ExecutorConfig,
}

impl Experiment {
    pub fn load(path: &Path) -> Result<Experiment, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.formula.is_some() && self.dra.is_some() {
            return Err(CliError::input("give either a formula or an automaton file, not both"));
        }
        if self.runs == Some(0) {
            return Err(CliError::input("runs must be at least 1"));
        }
        self.executor.validate().map_err(CliError::from)
    }

    pub fn eval_config(&self) -> EvalConfig {
        let defaults = EvalConfig::default();
        EvalConfig {
            formula: self.formula.clone().unwrap_or(defaults.formula),
            runs: self.runs.unwrap_or(defaults.runs),
            seed: self.seed.unwrap_or(defaults.seed),
            grid: self.grid.clone(),
            executor: self.executor.clone(),
        }
    }
}

/// Where worlds come from.
#[derive(Clone, Debug)]
pub enum Scenario {
    /// Generated grids; a fixed map seed, or one map per run seed.
    Grid { config: GridConfig, map_seed: Option<u64> },
    Explicit(Box<ExplicitScenario>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    #[serde(default)]
    config: GridConfig,
    seed: Option<u64>,
}

impl Scenario {
    /// Reads a scenario file: a JSON object whose `kind` is `explicit` (an
    /// enumerated model) or `grid` (generator settings).
    pub fn load(path: &Path) -> Result<(Scenario, String), CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        let bad = |m: String| CliError::input(format!("{}: {m}", path.display()));
        let mut value: Value = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
        let kind = value
            .as_object_mut()
            .and_then(|o| o.remove("kind"))
            .and_then(|k| k.as_str().map(str::to_string))
            .ok_or_else(|| bad("missing string field `kind`".into()))?;
        let scenario = match kind.as_str() {
            "explicit" => Scenario::Explicit(Box::new(
                ExplicitScenario::from_value(value).map_err(|e| bad(e.to_string()))?,
            )),
            "grid" => {
                let file: GridFile = serde_json::from_value(value).map_err(|e| bad(e.to_string()))?;
                Scenario::Grid { config: file.config, map_seed: file.seed }
            }
            other => return Err(bad(format!("unknown scenario kind `{other}`"))),
        };
        Ok((scenario, text))
    }

    pub fn world(&self, seed: u64) -> Result<World, RuntimeError> {
        match self {
            Scenario::Grid { config, map_seed } => Ok(GridScenario::generate(config, map_seed.unwrap_or(seed))?.world()),
            Scenario::Explicit(s) => World::from_explicit(s),
        }
    }

    pub fn grid(&self, seed: u64) -> Result<Option<GridScenario>, RuntimeError> {
        match self {
            Scenario::Grid { config, map_seed } => Ok(Some(GridScenario::generate(config, map_seed.unwrap_or(seed))?)),
            Scenario::Explicit(_) => Ok(None),
        }
    }
}

/// Everything a command needs, after merging flags into the config file.
pub struct Resolved {
    pub experiment: Experiment,
    pub eval: EvalConfig,
    pub scenario: Scenario,
    pub dra: Dra,
    pub hash: String,
}

#[derive(Serialize)]
struct Hashed<'a> {
    experiment: &'a Experiment,
    scenario: Option<&'a str>,
    automaton: Option<&'a str>,
}

pub fn resolve(experiment: Experiment) -> Result<Resolved, CliError> {
    experiment.validate()?;
    let (scenario, scenario_text) = match &experiment.scenario {
        Some(path) => {
            let (s, text) = Scenario::load(path)?;
            (s, Some(text))
        }
        None => (Scenario::Grid { config: experiment.grid.clone(), map_seed: None }, None),
    };
    let (dra, automaton_text) = match &experiment.dra {
        Some(path) => {
            let dra = import_dra(path).map_err(|e| CliError::input(e.to_string()))?;
            (dra, Some(std::fs::read_to_string(path).map_err(|e| CliError::input(e.to_string()))?))
        }
        None => (compile(&experiment.eval_config().formula)?, None),
    };
    let mut hashed_experiment = experiment.clone();
    hashed_experiment.out = None;
    let hash = config_hash(&Hashed {
        experiment: &hashed_experiment,
        scenario: scenario_text.as_deref(),
        automaton: automaton_text.as_deref(),
    });
    let eval = experiment.eval_config();
    Ok(Resolved { experiment, eval, scenario, dra, hash })
}

pub fn compile(formula: &str) -> Result<Dra, CliError> {
    let ltl = parse_ltl(formula).map_err(|e| CliError::input(e.to_string()))?;
    compile_fragment_dra(&ltl).map_err(|e| CliError::input(e.to_string()))
}
