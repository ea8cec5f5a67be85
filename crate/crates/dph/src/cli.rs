//! Argument parsing and dispatch for the `dph` binary.

use std::ffi::OsString;

use clap::{Parser, Subcommand};

use crate::commands;
use crate::config::{Algo, Params};

/// Differentially private learning of large-margin halfspaces.
#[derive(Parser)]
#[command(name = "dph", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Generate a margin-separated dataset and its generating-direction sidecar.
    Gen(Params),
    /// Train the (epsilon, delta)-private learner on a dataset file.
    LearnApprox(Params),
    /// Train the (epsilon, 0)-private learner on a dataset file.
    LearnPure(Params),
    /// Evaluate a model on a dataset file or on fresh draws from a sidecar.
    Eval(Params),
    /// Run a resumable parameter sweep on synthetic data.
    Sweep(Params),
    /// Pure learner on packing distributions: train on one, score on two.
    Packing(Params),
    /// Measure norm distortion of random sign projections.
    JlTest(Params),
}

/// Exit status of one invocation and the text meant for standard error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: u8,
    pub stderr: String,
}

/// Parses `args` (program name first) and runs the command. Help and version
/// text go straight to standard output. `env_seed` is the value of `DPH_SEED`.
pub fn run<I, T>(args: I, env_seed: Option<&str>) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return Outcome {
                code: 0,
                stderr: String::new(),
            };
        }
        Err(e) => {
            return Outcome {
                code: 1,
                stderr: e.render().to_string(),
            }
        }
    };
    let run = |p: Params, f: &dyn Fn(&Params) -> crate::Result<()>| p.resolve(env_seed).and_then(|p| f(&p));
    let result = match cli.command {
        Command::Gen(p) => run(p, &commands::gen),
        Command::LearnApprox(p) => run(p, &|p| commands::learn(p, Algo::Approx)),
        Command::LearnPure(p) => run(p, &|p| commands::learn(p, Algo::Pure)),
        Command::Eval(p) => run(p, &commands::eval),
        Command::Sweep(p) => run(p, &commands::sweep_cmd),
        Command::Packing(p) => run(p, &commands::packing),
        Command::JlTest(p) => run(p, &commands::jl_test),
    };
    match result {
        Ok(()) => Outcome {
            code: 0,
            stderr: String::new(),
        },
        Err(e) => Outcome {
            code: e.exit_code() as u8,
            stderr: format!("{}: {e}\n", e.name()),
        },
    }
}

#[cfg(test)]
mod tests;
