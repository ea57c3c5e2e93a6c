use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod analyze;
mod estimate;
mod output;
mod sweep;

#[derive(Parser)]
#[command(name = "phdim", version, about = "PH0 dimensions of training trajectories and their statistics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the PH0 dimension of a captured trajectory.
    Estimate(estimate::EstimateArgs),
    /// Correlate a measure with a target column of a run-record table.
    Analyze(analyze::AnalyzeArgs),
    /// Train and capture a single run.
    Train(sweep::TrainArgs),
    /// Train and capture every cell of a hyperparameter grid.
    Sweep(sweep::SweepArgs),
}

/// How a successful command ended.
pub enum Status {
    Ok,
    /// Output was written but every result is degenerate.
    Degenerate,
}

/// Invalid flag combination or value detected after parsing.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<phdim_core::Error>() {
        Some(phdim_core::Error::InvalidArgument(_)) => 2,
        Some(
            phdim_core::Error::Format(_)
            | phdim_core::Error::Schema(_)
            | phdim_core::Error::Csv(_)
            | phdim_core::Error::Json(_),
        ) => 3,
        Some(phdim_core::Error::Degenerate(_)) => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Estimate(args) => estimate::run(args),
        Command::Analyze(args) => analyze::run(args),
        Command::Train(args) => sweep::run_train(args),
        Command::Sweep(args) => sweep::run_sweep(args),
    };
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Degenerate) => ExitCode::from(4),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
