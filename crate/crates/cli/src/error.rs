use thiserror::Error;

use safeplan::runtime::RuntimeError;
use safeplan::synth::SynthError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError::Input(message.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Infeasible(_) => 2,
            CliError::Input(_) => 3,
        }
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        match e {
            SynthError::Infeasible { .. } => CliError::Infeasible(e.to_string()),
            SynthError::Config(_) => CliError::Input(e.to_string()),
            _ => CliError::Failed(e.to_string()),
        }
    }
}

impl From<RuntimeError> for CliError {
    fn from(e: RuntimeError) -> Self {
        match e {
            RuntimeError::Synthesis { source: SynthError::Infeasible { .. }, .. } => CliError::Infeasible(e.to_string()),
            RuntimeError::Synthesis { source: SynthError::Config(_), .. }
            | RuntimeError::Config(_)
            | RuntimeError::Generation(_)
            | RuntimeError::Model(_)
            | RuntimeError::Product(_)
            | RuntimeError::Ltl(_) => CliError::Input(e.to_string()),
            RuntimeError::Io(_) | RuntimeError::Synthesis { .. } | RuntimeError::Uncovered { .. } => {
                CliError::Failed(e.to_string())
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failed(e.to_string())
    }
}
