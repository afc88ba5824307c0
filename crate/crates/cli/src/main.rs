//! `ivexpand`: implied volatility from asymptotic expansions.

mod commands;
mod error;
mod grid;
mod output;
mod quotes;
mod series;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{CoeffsArgs, ForwardArgs, ImpliedArgs, Outcome, TableArgs};
use error::CliError;
use output::Format;

/// Implied volatility from asymptotic expansions of the Black-Scholes price.
///
/// Exit codes: 0 success, 1 usage error, 2 market data outside the
/// no-arbitrage band or outside an expansion's domain.
#[derive(Debug, Parser)]
#[command(name = "ivexpand", version)]
struct Cli {
    /// Output format (default: json for implied, csv otherwise).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Version banner and per-row diagnostics on stderr.
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Implied volatility of one quote or a quote file.
    ///
    /// Columns: [line, spot, strike, maturity, price,] sigma, theta_sq,
    /// regime, lambda, order_used, seed_sigma, iterations, residual, refined
    /// [, status].
    Implied(ImpliedArgs),
    /// Exact prices beside the forward series, one row per (K, T, σ).
    ///
    /// Columns: spot, strike, maturity, sigma, price, x, theta, regime,
    /// order, series_value, exact_value, abs_error, last_term, lambda, status.
    /// The output is a valid quote file for `implied --quotes`.
    Forward(ForwardArgs),
    /// Convergence table of one forward series over an (x, θ) grid.
    ///
    /// Columns: regime, x, theta, order, small_parameter, lambda,
    /// series_value, exact_value, abs_error, rel_error, normalized_remainder,
    /// last_term, status.
    Table(TableArgs),
    /// Exact coefficient values.
    ///
    /// Columns: k, value, decimal for a, b, c, eta; i, j, position, value,
    /// decimal for inversion.
    Coeffs(CoeffsArgs),
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    if cli.verbose {
        eprintln!("ivexpand {}", env!("CARGO_PKG_VERSION"));
    }
    let (outcome, default_format): (Outcome, Format) = match &cli.command {
        Command::Implied(args) => (commands::implied(args, cli.verbose)?, Format::Json),
        Command::Forward(args) => (commands::forward(args)?, Format::Csv),
        Command::Table(args) => (commands::table(args)?, Format::Csv),
        Command::Coeffs(args) => (commands::coeffs(args)?, Format::Csv),
    };
    let format = cli.format.unwrap_or(default_format);
    let mut out = output::sink(cli.output.as_deref())?;
    if outcome.single {
        outcome.table.write_single(&mut out, format)?;
    } else {
        outcome.table.write(&mut out, format)?;
    }
    out.flush()?;
    if cli.verbose {
        eprintln!(
            "{} rows, {} failed",
            outcome.table.rows.len(),
            outcome.failures
        );
    }
    Ok(outcome.failures == 0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
