//! Command-line interface: clear scenarios, sweep criterion values,
//! compare the negotiation against the centralized solver, and generate
//! synthetic scenarios.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "mbed",
    about = "Peer-to-peer market clearing over bilateral trades with product differentiation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Scenario file to clear.
    #[arg(long)]
    scenario: PathBuf,
    /// Override the common criterion magnitude of the scenario.
    #[arg(long)]
    criterion_value: Option<f64>,
    /// Tuning factors as a0,ae,b0,be,eta,delta (alpha = a0/k^ae, beta = b0/k^be).
    #[arg(long, value_name = "A0,AE,B0,BE,ETA,DELTA")]
    tuning: Option<String>,
    /// Stopping tolerances as eps_lambda,eps_p,eps_mu.
    #[arg(long, value_name = "L,P,MU")]
    eps: Option<String>,
    /// Iteration cap per timestep.
    #[arg(long)]
    max_iter: Option<u64>,
    /// Warm-start each timestep from the previous one.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    warm_start: bool,
    /// Fan agent computations out over threads (results are identical
    /// either way).
    #[arg(long, default_value_t = false, action = clap::ArgAction::Set)]
    parallel: bool,
    /// Output directory for CSV/JSON files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Recorded in report.json; clearing itself is deterministic.
    #[arg(long)]
    seed: Option<u64>,
    /// Exit nonzero if any timestep fails to converge.
    #[arg(long, default_value_t = false)]
    strict: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Clear one scenario and write the per-iteration trace.
    Run(RunArgs),
    /// Clear the scenario once per criterion value and tabulate inter-bus
    /// metrics.
    Sweep {
        /// Comma-separated criterion magnitudes, e.g. 0,0.5,1,2.
        values: String,
        #[command(flatten)]
        args: RunArgs,
    },
    /// Clear each timestep with the negotiation and the centralized
    /// solver; write per-step optimality gaps.
    Compare(RunArgs),
    /// Generate a synthetic scenario file.
    Gen {
        /// Output scenario path.
        #[arg(long)]
        out: PathBuf,
        /// Timestep count (hourly).
        #[arg(long, default_value_t = 168)]
        steps: usize,
        /// Series seed.
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => commands::run(&args),
        Command::Sweep { values, args } => commands::sweep(&values, &args),
        Command::Compare(args) => commands::compare(&args),
        Command::Gen { out, steps, seed } => commands::gen(&out, steps, seed),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
