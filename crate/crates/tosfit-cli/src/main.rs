//! Experiment harness: run optimization benchmarks from a config file,
//! verify the implementation against its reference oracles, or dump an
//! environment's full reward table.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime failure,
//! 4 verification failure.

mod config;
mod runner;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "tosfit", version, about = "Thompson-sampling optimization harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyLevel {
    /// Exact identities and oracle equivalences (criteria 1-10).
    Quick,
    /// Everything, including the 25-seed benchmark suites (criteria 1-14).
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum EnvName {
    Bandit,
    Seqlin,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Parallel seed workers (default: TOSFIT_WORKERS or all cores).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run the verification criteria and report pass/fail per criterion.
    Verify {
        #[arg(long, value_enum, default_value = "quick")]
        level: VerifyLevel,
    },
    /// Dump an environment's full (hash, point, reward) table as CSV.
    Enumerate {
        #[arg(long, value_enum)]
        env: EnvName,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 7)]
        env_seed: u64,
        /// Sequence length (seqlin only).
        #[arg(long, default_value_t = 12)]
        length: usize,
        /// Arm count (bandit only).
        #[arg(long, default_value_t = 64)]
        arms: usize,
        /// Feature dimension (bandit only).
        #[arg(long, default_value_t = 8)]
        features: usize,
    },
}

fn default_workers() -> usize {
    if let Ok(raw) = std::env::var("TOSFIT_WORKERS") {
        if let Ok(n) = raw.parse::<usize>() {
            return n.max(1);
        }
    }
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn cmd_run(config: &PathBuf, workers: Option<usize>) -> ExitCode {
    let text = match std::fs::read_to_string(config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("config error: cannot read {}: {e}", config.display());
            return ExitCode::from(2);
        }
    };
    let spec = match config::parse_config(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    let workers = workers.unwrap_or_else(default_workers);
    match runner::run_experiment(&spec, workers) {
        Ok(summary) => {
            println!(
                "{}: {} per-seed traces ({} seeds failed) -> {}",
                spec.algorithm.name(),
                summary.per_seed_files.len(),
                summary.failed_seeds.len(),
                summary.aggregate_file.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(3)
        }
    }
}

fn cmd_verify(level: VerifyLevel) -> ExitCode {
    let reports = match level {
        VerifyLevel::Quick => tosfit::checks::quick_criteria(),
        VerifyLevel::Full => tosfit::checks::all_criteria(),
    };
    let mut all_passed = true;
    for r in &reports {
        println!("{}", r.line());
        all_passed &= r.passed;
    }
    if all_passed {
        println!("verification passed ({} criteria)", reports.len());
        ExitCode::SUCCESS
    } else {
        eprintln!("verification failed");
        ExitCode::from(4)
    }
}

fn cmd_enumerate(
    env: EnvName,
    out: &Path,
    env_seed: u64,
    length: usize,
    arms: usize,
    features: usize,
) -> ExitCode {
    let written = match env {
        EnvName::Bandit => {
            match tosfit::env::FiniteGaussianBandit::new(arms, features, 0.0, 0.0, env_seed) {
                Ok(e) => runner::enumerate_to_csv(&e, out),
                Err(e) => {
                    eprintln!("config error: {e}");
                    return ExitCode::from(2);
                }
            }
        }
        EnvName::Seqlin => match tosfit::env::SequenceLinearEnv::new(length, 0.0, env_seed) {
            Ok(e) => runner::enumerate_to_csv(&e, out),
            Err(e) => {
                eprintln!("config error: {e}");
                return ExitCode::from(2);
            }
        },
    };
    match written {
        Ok(n) => {
            println!("{n} points -> {}", out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(3)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, workers } => cmd_run(&config, workers),
        Command::Verify { level } => cmd_verify(level),
        Command::Enumerate { env, out, env_seed, length, arms, features } => {
            cmd_enumerate(env, &out, env_seed, length, arms, features)
        }
    }
}
