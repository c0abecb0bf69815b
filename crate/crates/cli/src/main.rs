//! `hplab`: reproducible experiments on finite restrictions of complete Pick
//! kernels.
//!
//! Exit status is 0 on success, 1 on numerical failure or a flagged
//! non-convergence (with a JSON diagnostic on stderr) and 2 on usage errors.

mod config;
mod plot;
mod report;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{ExperimentConfig, Format};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
}

impl From<hplab_core::Error> for CliError {
    fn from(e: hplab_core::Error) -> Self {
        use hplab_core::Error as E;
        match e {
            E::Parse(_)
            | E::InvalidArgument(_)
            | E::InvalidPoint(_)
            | E::PointMismatch(_)
            | E::Dimension { .. }
            | E::Index { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "hplab",
    version,
    about = "Weak-product, Hankel and Hardy-scale experiments on finite point sets"
)]
struct Cli {
    /// Read the whole experiment from a JSON file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for randomized experiments (HPLAB_SEED takes precedence).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the artifact here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Option<config::Command>,
}

fn env_seed() -> Result<Option<u64>, CliError> {
    match std::env::var("HPLAB_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("HPLAB_SEED='{s}' is not a 64-bit integer"))),
        Err(_) => Ok(None),
    }
}

fn build_config(cli: Cli) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match (cli.config, cli.command) {
        (Some(path), None) => {
            let text =
                std::fs::read_to_string(&path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            ExperimentConfig::from_json(&text)?
        }
        (None, Some(cmd)) => cmd.into_config()?,
        (Some(_), Some(_)) => return Err(CliError::Usage("--config replaces the subcommand; give one".into())),
        (None, None) => return Err(CliError::Usage("no command given (try --help)".into())),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(seed) = env_seed()? {
        cfg.seed = seed;
    }
    let out = cfg.output.get_or_insert(config::OutputSpec {
        path: None,
        format: None,
    });
    if cli.output.is_some() {
        out.path = cli.output;
    }
    if cli.format.is_some() {
        out.format = cli.format;
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<Option<(&'static str, String)>, CliError> {
    let cfg = build_config(cli)?;
    let outcome = run::run(&cfg)?;
    let out = cfg.output.unwrap_or(config::OutputSpec {
        path: None,
        format: None,
    });
    let text = outcome.report.render(out.format)?;
    match out.path {
        Some(path) => std::fs::write(&path, text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(outcome.flagged)
}

fn diagnostic(kind: &str, message: &str) {
    eprintln!("{}", serde_json::json!({ "error": kind, "message": message }));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some((kind, message))) => {
            diagnostic(kind, &message);
            ExitCode::from(1)
        }
        Err(CliError::Usage(m)) => {
            eprintln!("hplab: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(m)) => {
            diagnostic("numerical", &m);
            ExitCode::from(1)
        }
    }
}
