//! `qvote`: run, estimate and check quantum computed elections.
//!
//! Every command writes one JSON document to stdout; diagnostics go to
//! stderr. Exit codes: 0 success, 1 a verification check failed, 2 bad
//! input or configuration, 3 numerical corruption.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use qvote_core::config::ConfigFile;
use qvote_core::density::set_qubit_cap;
use qvote_core::protocol::{PreparedElection, TieRule};
use qvote_core::rule::{evaluate_algebraic, parse};
use qvote_core::verify::{run_verification, CheckGroup, CheckStatus, DEFAULT_SEED};
use qvote_core::{ElectionConfig, QvoteError};

const CAP_ENV: &str = "QVOTE_QUBIT_CAP";

#[derive(Parser)]
#[command(name = "qvote", version, about = "Quantum logical veto and nomination simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one election and print its outcome.
    Run {
        config: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Require strictly more than half of the records to be 1.
        #[arg(long)]
        strict_majority: bool,
    },
    /// Pool the records of many elections and compare with the exact value.
    Estimate {
        config: PathBuf,
        /// Number of elections (defaults to the config's `trials`).
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        strict_majority: bool,
    },
    /// Exact winning probability of a formula for independent ballots.
    Eval {
        #[arg(long)]
        formula: String,
        /// Comma-separated voter probabilities, v1 first.
        #[arg(long, value_delimiter = ',', num_args = 1.., allow_negative_numbers = true)]
        probs: Vec<f64>,
    },
    /// Run the self-check suite.
    Verify {
        /// Only run one group: lemmas, theorems, examples, observations, formulas, protocol.
        #[arg(long)]
        filter: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the syntax tree of a formula.
    Parse {
        #[arg(long)]
        formula: String,
    },
}

fn load_config(path: &Path, seed: Option<u64>, strict: bool) -> Result<ElectionConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| QvoteError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = ConfigFile::from_json(&text)?.to_election()?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if strict {
        cfg.tie = TieRule::Strict;
    }
    Ok(cfg)
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value).context("serializing output")?);
    Ok(())
}

fn execute(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run { config, seed, strict_majority } => {
            let cfg = load_config(&config, seed, strict_majority)?;
            let outcome = PreparedElection::new(&cfg)?.run_trial(0)?;
            print_json(&outcome)?;
        }
        Command::Estimate { config, trials, seed, strict_majority } => {
            let cfg = load_config(&config, seed, strict_majority)?;
            let trials = trials.unwrap_or(cfg.trials);
            let estimate = PreparedElection::new(&cfg)?.estimate(trials)?;
            eprintln!(
                "{} samples: empirical {:.4}, exact {:.6}",
                estimate.samples, estimate.empirical_mean, estimate.analytic_wp
            );
            print_json(&estimate)?;
        }
        Command::Eval { formula, probs } => {
            let ast = parse(&formula).map_err(QvoteError::from)?;
            let wp = evaluate_algebraic(&ast, &probs)?;
            print_json(&json!({ "formula": ast.to_string(), "probs": probs, "wp": wp }))?;
        }
        Command::Verify { filter, seed } => {
            let group = filter.as_deref().map(str::parse::<CheckGroup>).transpose()?;
            let report = run_verification(group, seed.unwrap_or(DEFAULT_SEED));
            for c in &report.checks {
                eprintln!("{:<12} {:<12} {:<30} {}", c.status, c.group.name(), c.name, c.detail);
            }
            eprintln!(
                "{} passed, {} failed, {} discrepancies",
                report.passed, report.failed, report.discrepancies
            );
            print_json(&report)?;
            if report.checks.iter().any(|c| c.status == CheckStatus::Fail) {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Parse { formula } => {
            let ast = parse(&formula).map_err(QvoteError::from)?;
            print_json(&json!({ "formula": ast.to_string(), "ast": ast }))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn apply_cap_override() -> Result<()> {
    if let Ok(raw) = std::env::var(CAP_ENV) {
        let cap: usize = raw
            .trim()
            .parse()
            .map_err(|_| QvoteError::Config(format!("{CAP_ENV} must be a positive integer, got {raw:?}")))?;
        set_qubit_cap(cap);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match apply_cap_override().and_then(|()| execute(cli)) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            let numerical = err.downcast_ref::<QvoteError>().is_some_and(QvoteError::is_numerical);
            ExitCode::from(if numerical { 3 } else { 2 })
        }
    }
}
