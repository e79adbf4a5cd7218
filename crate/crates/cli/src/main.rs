//! `safeplan`: compile tasks, plan once, run online episodes and evaluate
//! batches.
//!
//! Exit codes: 0 success, 2 infeasible synthesis, 3 input error, 1 other
//! failures.

mod commands;
mod error;
mod experiment;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use safeplan::synth::SafetyScope;

use error::CliError;
use experiment::Experiment;

#[derive(Parser)]
#[command(name = "safeplan", version, about = "Online LTL planning with safe-return constraints")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a formula into a Rabin automaton file.
    Compile {
        #[arg(long)]
        formula: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Synthesize once from the prior belief and write the policies.
    Plan(Common),
    /// Run one online episode.
    Run {
        #[command(flatten)]
        common: Common,
        /// Stage at which a return home is requested.
        #[arg(long)]
        activate: Option<usize>,
    },
    /// Run a batch of episodes and summarize it.
    Eval(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Scope {
    FirstStep,
    AllStates,
}

#[derive(Args)]
struct Common {
    /// Experiment file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scenario file (JSON, `kind` = `explicit` or `grid`).
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long, conflicts_with = "dra")]
    formula: Option<String>,
    /// Rabin automaton in the supported HOA subset.
    #[arg(long)]
    dra: Option<PathBuf>,
    #[arg(long)]
    chi_o: Option<f64>,
    #[arg(long)]
    chi_r: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    runs: Option<usize>,
    /// Drop the safety constraints. With `eval`, add a baseline batch.
    #[arg(long)]
    baseline: bool,
    #[arg(long, value_enum)]
    safety_scope: Option<Scope>,
    #[arg(long)]
    max_stages: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn experiment(&self) -> Result<Experiment, CliError> {
        let mut e = match &self.config {
            Some(path) => Experiment::load(path)?,
            None => Experiment::default(),
        };
        if let Some(s) = &self.scenario {
            e.scenario = Some(s.clone());
        }
        if let Some(f) = &self.formula {
            e.formula = Some(f.clone());
            e.dra = None;
        }
        if let Some(d) = &self.dra {
            e.dra = Some(d.clone());
            e.formula = None;
        }
        let syn = &mut e.executor.synthesis;
        if let Some(v) = self.chi_o {
            syn.chi_o = v;
        }
        if let Some(v) = self.chi_r {
            syn.chi_r = v;
        }
        if let Some(scope) = self.safety_scope {
            syn.safety_scope = match scope {
                Scope::FirstStep => SafetyScope::FirstStep,
                Scope::AllStates => SafetyScope::AllStates,
            };
        }
        if let Some(v) = self.seed {
            e.seed = Some(v);
        }
        if let Some(v) = self.runs {
            e.runs = Some(v);
        }
        if let Some(v) = self.max_stages {
            e.executor.max_stages = v;
        }
        if let Some(o) = &self.out {
            e.out = Some(o.clone());
        }
        Ok(e)
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Compile { formula, out } => commands::compile(&formula, &out),
        Command::Plan(c) => {
            let mut e = c.experiment()?;
            e.executor.synthesis.baseline |= c.baseline;
            commands::plan(e)
        }
        Command::Run { common, activate } => {
            let mut e = common.experiment()?;
            e.executor.synthesis.baseline |= common.baseline;
            if activate.is_some() {
                e.activate = activate;
            }
            commands::run(e)
        }
        Command::Eval(c) => commands::eval(c.experiment()?, c.baseline),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
