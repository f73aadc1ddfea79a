//! `frac-orlicz`: experiment driver for the fractional Orlicz-Sobolev toolkit.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod report;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use frac_orlicz::Error;

use config::Config;
use report::{Artifacts, Manifest};

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Lib(Error),
    Io(std::io::Error),
    Csv(csv::Error),
    Json(serde_json::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "validation: {msg}"),
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Csv(e) => write!(f, "{e}"),
            CliError::Json(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Csv(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Json(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Lib(e) => match e {
                Error::Range { .. }
                | Error::Degenerate(_)
                | Error::Invalid(_)
                | Error::Precondition(_)
                | Error::Resolution { .. } => 2,
                Error::Divergence(_) => 3,
                Error::NonConvergence { .. } | Error::StepUnderflow { .. } => 4,
                _ => 1,
            },
            _ => 1,
        }
    }

    fn status(&self) -> &'static str {
        match self.exit_code() {
            2 => "validation",
            3 => "divergence",
            4 => "non_convergence",
            _ => "error",
        }
    }
}

#[derive(Parser)]
#[command(name = "frac-orlicz", version, about = "Fractional Orlicz-Sobolev experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Override a config field, e.g. `--set nfunction.p=3`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Clone, Copy, Subcommand)]
enum Command {
    /// N-function, conjugate, inverse, Sobolev conjugate and Δ2 tables.
    Nfun,
    /// Orlicz and fractional norms of the configured function.
    Norm,
    /// The fractional M-Laplacian of the configured function on the grid.
    Apply,
    /// Solve the Dirichlet problem with the configured right-hand side.
    Solve,
    /// Run the configured check suites.
    Verify,
    /// Cross-validate the power case against the W^{s,p} seminorm.
    ReduceP,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Nfun => "nfun",
            Command::Norm => "norm",
            Command::Apply => "apply",
            Command::Solve => "solve",
            Command::Verify => "verify",
            Command::ReduceP => "reduce-p",
        }
    }
}

fn load_config(cli: &Cli) -> Result<Config, CliError> {
    let text = match &cli.config {
        Some(path) => Some(
            std::fs::read_to_string(path)
                .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?,
        ),
        None => None,
    };
    let mut cfg = Config::load(text.as_deref(), &cli.set)?;
    if let Ok(seed) = std::env::var("FRAC_ORLICZ_SEED") {
        cfg.seed = seed
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("FRAC_ORLICZ_SEED: not an unsigned integer: `{seed}`")))?;
    }
    Ok(cfg)
}

fn configure_threads(threads: Option<usize>) -> Result<(), CliError> {
    let Some(n) = threads else { return Ok(()) };
    if n == 0 {
        return Err(CliError::Validation("--threads must be positive".into()));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Validation(format!("--threads: {e}")))?;
    Ok(())
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    configure_threads(cli.threads)?;
    let cfg = load_config(cli)?;
    let quadrature = cfg.quadrature;
    let mut artifacts = Artifacts::new(&cli.out)?;
    let outcome = commands::dispatch(cli.command, &cfg, &mut artifacts);
    let (status, summary, error, code) = match &outcome {
        Ok(summary) => ("ok", summary.clone(), None, 0),
        Err(e) => (e.status(), serde_json::Value::Null, Some(e.to_string()), e.exit_code()),
    };
    let divergence = match &outcome {
        Err(CliError::Lib(Error::Divergence(report))) => Some(report.as_ref()),
        _ => None,
    };
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        subcommand: cli.command.name(),
        status,
        seed: cfg.seed,
        config_sha256: report::config_hash(&cfg),
        config: &cfg,
        quadrature: cfg.params().map(|p| p.effective_rule()).unwrap_or(quadrature),
        files: artifacts.files().to_vec(),
        summary,
        divergence,
        error: error.clone(),
    };
    artifacts.json("manifest.json", &manifest)?;
    if let Some(msg) = error {
        eprintln!("frac-orlicz {}: {msg}", cli.command.name());
    }
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("frac-orlicz: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
