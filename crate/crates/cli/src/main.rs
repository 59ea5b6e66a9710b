//! `stoptime` — estimate how long a monitored process keeps improving.
//!
//! Subcommands: `detect` locates the stopping time in a CSV of curves,
//! `bootstrap` adds a resampled uncertainty distribution, `simulate` runs
//! seeded Monte Carlo studies from a config file, and `forecast` emits
//! h-step curve forecasts. Exit codes: 0 success, 1 input error,
//! 2 numerical failure.

mod commands;
mod emit;
mod error;
mod ingest;
mod report;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "stoptime",
    version,
    about = "Stopping-time estimation for functional time series"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Locate the structural break in one-step forecast errors.
    Detect(commands::PipelineArgs),
    /// Detect, then bootstrap the stopping-time distribution.
    Bootstrap(commands::BootstrapArgs),
    /// Run a seeded Monte Carlo experiment grid.
    Simulate(commands::SimulateArgs),
    /// Emit h-step-ahead curve forecasts.
    Forecast(commands::ForecastArgs),
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.cmd {
        Cmd::Detect(args) => commands::cmd_detect(args),
        Cmd::Bootstrap(args) => commands::cmd_bootstrap(args),
        Cmd::Simulate(args) => commands::cmd_simulate(args),
        Cmd::Forecast(args) => commands::cmd_forecast(args),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
