//! Online execution: environments, the observe/update/re-plan loop, return
//! activations and batch evaluation.

mod batch;
mod executor;
mod grid;
mod world;

pub use batch::{
    activation_stage, config_hash, evaluate_batch, evaluate_worlds, metrics_csv, summarize, summary_csv, BatchResult,
    BatchSummary, EvalConfig, CASE_STUDY_FORMULA,
};
pub use executor::{
    online_execute, Executor, ExecutorConfig, ReturnRecord, RunRecord, RunStatus, RunTimings, StageRecord,
    StepPolicy, SynthesisStats,
};
pub use grid::{Cell, GridConfig, GridScenario, Layout, PriorConfig, Terrain, DIRECTIONS, GRID_AP};
pub use world::{Sensor, World};

use thiserror::Error;

use crate::ltl::LtlError;
use crate::model::ModelError;
use crate::product::ProductError;
use crate::synth::SynthError;

#[derive(Debug, Error)]
pub enum RuntimeError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("grid generation failed: {0}")]
    Generation(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Product(#[from] ProductError),
    #[error(transparent)]
    Ltl(#[from] LtlError),
    #[error("synthesis failed at stage {stage}: {source}")]
    Synthesis { stage: usize, source: SynthError },
    #[error("policy does not cover the current state at stage {stage}")]
    Uncovered { stage: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<SynthError> for RuntimeError {
    fn from(e: SynthError) -> Self {
        RuntimeError::Synthesis { stage: 0, source: e }
    }
}
