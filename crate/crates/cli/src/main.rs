#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

mod commands;
mod config;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{CliError, Options};
use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "oqs",
    version,
    about = "Open quantum system dynamics from model configuration files"
)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,

    /// Model configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output file (written atomically); standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Tolerance override for verification checks.
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Verb {
    /// Markovian trajectory as CSV of observable expectation values.
    Evolve,
    /// Weak-coupling generator report: rates, Lamb shift, jumps, KMS and stationarity residuals.
    Derive,
    /// Verification table (cp, markov, kossakowski, spohn, relaxing).
    Check,
    /// Steady states and relaxation verdict.
    Steady,
    /// Liouvillian eigenvalues, gap and zero multiplicity.
    Spectrum,
    /// Trajectory under the configured non-Markovian scheme.
    Nonmarkov,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("OQS_NUM_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("OQS_NUM_THREADS must be a positive integer, found `{v}`")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot configure thread pool: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    configure_threads()?;
    if cli.tol.is_some_and(|t| !(t > 0.0) || !t.is_finite()) {
        return Err(CliError::Config("--tol must be a positive number".into()));
    }
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
    let cfg = RunConfig::load(path).map_err(|e| CliError::Config(e.to_string()))?;
    let opts = Options {
        seed: cli.seed,
        tol: cli.tol,
    };
    let report = match cli.verb {
        Verb::Evolve => commands::evolve(&cfg)?,
        Verb::Derive => commands::derive(&cfg)?,
        Verb::Check => commands::check(&cfg, opts)?,
        Verb::Steady => commands::steady(&cfg, opts)?,
        Verb::Spectrum => commands::spectrum(&cfg, opts)?,
        Verb::Nonmarkov => commands::nonmarkov(&cfg)?,
    };
    match &cli.out {
        Some(p) => {
            io::write_atomic(p, &report.text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display())))?
        }
        None => print!("{}", report.text),
    }
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
