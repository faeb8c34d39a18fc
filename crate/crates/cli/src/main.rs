//! `monostat`: grand-partition functions and related checks for monotone,
//! block-monotone and Boltzmann statistics, emitted as CSV.
//!
//! Exit status is 0 when every check of the run passes, 1 when some check
//! fails (a JSON summary goes to stderr) and 2 on invalid input.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use crate::config::RunConfig;
use crate::output::FailureSummary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    /// Partition function ζ(β) with its tail bound.
    Zeta,
    /// Grand-partition value per (β, z) point.
    Grand,
    /// Series coefficients at one point.
    Coeffs,
    /// Sandwich bound scan, or the low-density path with `--r-path`.
    Bounds,
    /// Z and average particle numbers for several statistics.
    Scan,
    /// Second-derivative scan and quartic fit.
    Appendix,
    /// Operator relations and counting identities.
    FockCheck,
}

#[derive(Debug, Parser)]
#[command(name = "monostat", version, about = "Thermodynamics of monotone and Boltzmann statistics")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON file with any of the options below; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    run: RunConfig,
}

fn resolve(cli: &Cli) -> anyhow::Result<RunConfig> {
    let base = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    base.overlay(cli.run.clone()).absorb_grid_file()
}

/// Writes the resolved configuration next to the output, or to stderr.
fn record_config(command: Command, cfg: &RunConfig) -> anyhow::Result<()> {
    let name = command.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
    let doc = serde_json::json!({ "command": name, "config": cfg });
    let text = serde_json::to_string_pretty(&doc)? + "\n";
    match (&cfg.out, command) {
        (Some(dir), Command::Appendix) => std::fs::write(dir.join("config.json"), text)?,
        (Some(out), _) => {
            let mut path = out.clone().into_os_string();
            path.push(".config.json");
            std::fs::write(PathBuf::from(path), text)?;
        }
        (None, _) => eprint!("{text}"),
    }
    Ok(())
}

fn run(cli: &Cli) -> anyhow::Result<Vec<output::Failure>> {
    let cfg = resolve(cli)?;
    let failures = match cli.command {
        Command::Zeta => commands::zeta(&cfg)?,
        Command::Grand => commands::grand(&cfg)?,
        Command::Coeffs => commands::coeffs(&cfg)?,
        Command::Bounds => commands::bounds(&cfg)?,
        Command::Scan => commands::scan(&cfg)?,
        Command::Appendix => commands::appendix(&cfg)?,
        Command::FockCheck => commands::fock_check(&cfg)?,
    };
    record_config(cli.command, &cfg)?;
    Ok(failures)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
    match run(&cli) {
        Ok(failures) if failures.is_empty() => ExitCode::SUCCESS,
        Ok(failures) => {
            let summary = FailureSummary { status: "fail", command: &name, failures: &failures };
            eprintln!("{}", serde_json::to_string(&summary).unwrap_or_default());
            ExitCode::from(1)
        }
        Err(e) => {
            let message = format!("{e:#}");
            eprintln!("{}", serde_json::json!({ "status": "error", "command": name, "message": message }));
            ExitCode::from(2)
        }
    }
}
