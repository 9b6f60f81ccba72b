//! `fairsel`: selection experiments under group-dependent estimation noise.
//!
//! Subcommands:
//! - `asymptotic-curve`: infinite-population fractions, thresholds and
//!   utility over an α₁ grid, per algorithm, with the gap versus the
//!   group-oblivious baseline.
//! - `montecarlo`: finite-population replication sweep.
//! - `dataset`: scored-dataset experiment (real file or bundled synthetic
//!   fixture).
//! - `verify`: runtime invariant suites.
//!
//! Exit codes: 0 success, 1 invariant failure, 2 usage or i/o error.

mod cmd_curve;
mod cmd_dataset;
mod cmd_montecarlo;
mod cmd_verify;
mod config;
mod output;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use config::GridSpec;

#[derive(Parser)]
#[command(name = "fairsel", version, about = "Two-group selection experiments under noisy evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Infinite-population curves over a stage-one budget grid
    AsymptoticCurve(CurveArgs),
    /// Finite-population Monte Carlo sweep
    Montecarlo(MonteCarloArgs),
    /// Scored-dataset experiment with injected estimation noise
    Dataset(DatasetArgs),
    /// Run invariant check suites
    Verify(VerifyArgs),
}

#[derive(clap::Args)]
struct CurveArgs {
    /// JSON config file; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path ("-" or absent: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    p_a: Option<f64>,
    #[arg(long)]
    sigma_a: Option<f64>,
    #[arg(long)]
    sigma_b: Option<f64>,
    /// Stage-one budget: a value or start:stop:count
    #[arg(long, value_parser = GridSpec::parse)]
    alpha1: Option<GridSpec>,
    /// Stage-two budget (absent: one-stage selection)
    #[arg(long)]
    alpha2: Option<f64>,
    /// Comma-separated algorithms: group-oblivious, gamma:<g>,
    /// demographic-parity, bayesian-optimal
    #[arg(long, value_delimiter = ',')]
    algorithms: Option<Vec<String>>,
    /// Accepted for interface uniformity; this subcommand is deterministic
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(clap::Args)]
struct MonteCarloArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    p_a: Option<f64>,
    #[arg(long)]
    sigma_a: Option<f64>,
    #[arg(long)]
    sigma_b: Option<f64>,
    /// Population size per replication
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_parser = GridSpec::parse)]
    alpha1: Option<GridSpec>,
    #[arg(long)]
    alpha2: Option<f64>,
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    algorithms: Option<Vec<String>>,
}

#[derive(clap::Args)]
struct DatasetArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// Delimited score file with a header row
    #[arg(long)]
    input: Option<PathBuf>,
    /// Use the bundled synthetic exam-score fixture instead of a file
    #[arg(long)]
    synthetic: bool,
    /// Shrink the synthetic fixture group sizes by this divisor
    #[arg(long)]
    fixture_divisor: Option<usize>,
    #[arg(long)]
    group_col: Option<String>,
    #[arg(long)]
    score_col: Option<String>,
    /// Single-character field delimiter
    #[arg(long)]
    delimiter: Option<char>,
    /// Noise scale of the reference group
    #[arg(long)]
    base_sigma: Option<f64>,
    /// Group label whose noise is k times the base
    #[arg(long)]
    noisy_label: Option<String>,
    /// Comma-separated noise ratios k
    #[arg(long, value_delimiter = ',')]
    k_values: Option<Vec<f64>>,
    #[arg(long, value_parser = GridSpec::parse)]
    alpha1: Option<GridSpec>,
    #[arg(long)]
    alpha2: Option<f64>,
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    algorithms: Option<Vec<String>>,
    /// Write 50-bin per-group histograms of scores and estimates here
    #[arg(long)]
    emit_histogram: Option<PathBuf>,
    /// Write the candidate score table here before running
    #[arg(long)]
    emit_fixture: Option<PathBuf>,
}

#[derive(clap::Args)]
struct VerifyArgs {
    /// Suite: core, asymptotic, theorems, montecarlo or all
    #[arg(default_value = "all")]
    suite: String,
    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
}

fn init_threads(threads: Option<usize>) {
    if let Some(n) = threads {
        // a second init in the same process is harmless; ignore it
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::AsymptoticCurve(args) => {
            init_threads(args.threads);
            cmd_curve::run(args)
        }
        Command::Montecarlo(args) => {
            init_threads(args.threads);
            cmd_montecarlo::run(args)
        }
        Command::Dataset(args) => {
            init_threads(args.threads);
            cmd_dataset::run(args)
        }
        Command::Verify(args) => {
            init_threads(args.threads);
            cmd_verify::run(args)
        }
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
