//! `divlab`: command-line front end for the divergence laboratory.
//!
//! Exit codes: 0 success, 1 usage or config error, 2 a probe contradicts a
//! Known label, 3 numerical failure.

mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use divlab_core::lab::Direction;
use divlab_core::Error;

#[derive(Debug, Parser)]
#[command(
    name = "divlab",
    version,
    about = "Quantum divergence and trace-functional convexity laboratory"
)]
struct Cli {
    /// Run every loop on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the region label of Psi_{p,q,s} (or Upsilon_{p,s} with --upsilon).
    Classify(ClassifyArgs),
    /// Classify and probe every point of a grid; writes CSV.
    Sweep(SweepArgs),
    /// Randomized midpoint probe at one point; writes a JSON report.
    Probe(ProbeArgs),
    /// Data-processing probe of D_{alpha,z}; writes a JSON report.
    Dpi(DpiArgs),
    /// Neyman-Pearson error exponents; writes CSV.
    Stein(SteinArgs),
    /// Certified counterexample search; writes a JSON report.
    Counterexample(CounterexampleArgs),
    /// Run an identity suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    #[arg(long, allow_hyphen_values = true)]
    p: f64,
    #[arg(long, allow_hyphen_values = true, required_unless_present = "upsilon")]
    q: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    s: f64,
    /// Classify Upsilon_{p,s} = Tr (K* A^p K)^s instead.
    #[arg(long, conflicts_with = "q")]
    upsilon: bool,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// CSV destination (default: the config's `output`, else stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    witness_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DirectionArg {
    Convex,
    Concave,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::Convex => Direction::Convex,
            DirectionArg::Concave => Direction::Concave,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KArg {
    Identity,
    Random,
}

#[derive(Debug, Args)]
struct ProbeArgs {
    #[arg(long, allow_hyphen_values = true)]
    p: f64,
    #[arg(long, allow_hyphen_values = true)]
    q: f64,
    #[arg(long, allow_hyphen_values = true)]
    s: f64,
    /// Direction to test (default: the one implied by the region label).
    #[arg(long, value_enum)]
    direction: Option<DirectionArg>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; the probe uses the same per-point seed as a sweep row.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, value_enum)]
    k: Option<KArg>,
    #[arg(long)]
    witness_dir: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DpiArgs {
    #[arg(long, allow_hyphen_values = true)]
    alpha: f64,
    #[arg(long, allow_hyphen_values = true)]
    z: f64,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    channels: Option<usize>,
    #[arg(long)]
    pairs: Option<usize>,
    #[arg(long)]
    witness_dir: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SteinArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Null hypothesis, e.g. `0.9,0.1`.
    #[arg(long, value_parser = config::parse_probs, conflicts_with_all = ["config", "rho"])]
    r: Option<config::Probs>,
    #[arg(long, value_parser = config::parse_probs, conflicts_with_all = ["config", "rho"])]
    s: Option<config::Probs>,
    /// Quantum null hypothesis as a matrix JSON file.
    #[arg(long, requires = "sigma", conflicts_with = "config")]
    rho: Option<PathBuf>,
    #[arg(long, requires = "rho")]
    sigma: Option<PathBuf>,
    #[arg(long)]
    eps: Option<f64>,
    /// `start:end:step` or a comma list.
    #[arg(long = "N")]
    n: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CounterexampleArgs {
    #[arg(long, allow_hyphen_values = true)]
    p: f64,
    /// Search Psi_{p,q,s}; without it the target is Upsilon_{p,s}.
    #[arg(long, allow_hyphen_values = true)]
    q: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    s: f64,
    #[arg(long, value_enum)]
    direction: DirectionArg,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    witness_dir: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// symmetries | variational | lieb-thirring | uhlmann | opconv | integral-rep | all
    suite: String,
    #[arg(long)]
    seed: u64,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

/// An error with its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Contradiction { .. } => 2,
        Error::AtSample { source, .. } => exit_code(source),
        Error::EigenNoConvergence { .. }
        | Error::Domain { .. }
        | Error::SingularInner { .. }
        | Error::Numerical(_) => 3,
        _ => 1,
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    divlab_core::tolerance::install_from_env()?;
    let mode = if cli.sequential {
        divlab_core::ExecMode::Sequential
    } else {
        divlab_core::ExecMode::default()
    };
    match cli.command {
        Command::Classify(a) => commands::classify(a),
        Command::Sweep(a) => commands::sweep(a, mode),
        Command::Probe(a) => commands::probe(a, mode),
        Command::Dpi(a) => commands::dpi(a, mode),
        Command::Stein(a) => commands::stein(a, mode),
        Command::Counterexample(a) => commands::counterexample(a),
        Command::Verify(a) => commands::verify(a),
    }
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
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
