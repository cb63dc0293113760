//! Command-line interface for quantile unit-log-symmetric ARMA modeling:
//! fitting, simulation, forecasting, Monte Carlo studies, residual
//! diagnostics and quantile sweeps over bounded time series.

mod commands;
mod config;
mod data;
mod output;
mod svg;

use clap::{Parser, Subcommand};

use config::Flags;

/// A single-line error; the process exits nonzero with `error: <reason>`.
#[derive(Debug)]
pub struct CliError(pub String);

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Parser)]
#[command(
    name = "quls",
    about = "Quantile unit-log-symmetric ARMA models for series on (0,1)",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model by conditional maximum likelihood.
    Fit(Flags),
    /// Generate a synthetic series from a named scenario.
    Simulate(Flags),
    /// Fit on a training window and forecast the held-out tail.
    Forecast(Flags),
    /// Run the Monte Carlo bias/RMSE study.
    Mc(Flags),
    /// Residual diagnostics and QQ data for a fitted model.
    Diagnose(Flags),
    /// Fit across a grid of quantile levels and summarize fit criteria.
    TauSweep(Flags),
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Fit(flags) => run(flags, commands::cmd_fit),
        Command::Simulate(flags) => run(flags, commands::cmd_simulate),
        Command::Forecast(flags) => run(flags, commands::cmd_forecast),
        Command::Mc(flags) => run(flags, commands::cmd_mc),
        Command::Diagnose(flags) => run(flags, commands::cmd_diagnose),
        Command::TauSweep(flags) => run(flags, commands::cmd_tau_sweep),
    };
    if let Err(e) = outcome {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn run(flags: Flags, body: fn(&Flags) -> Result<(), CliError>) -> Result<(), CliError> {
    let resolved = flags.resolve()?;
    body(&resolved)
}
