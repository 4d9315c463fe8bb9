#![forbid(unsafe_code)]

//! `rmt-lab` — command-line driver for the random-matrix laboratory.
//!
//! Subcommands:
//! - `run` — execute an experiment from a JSON config and write
//!   `report.json`, `cells.csv`, and `manifest.json`;
//! - `list-experiments` — print the experiment registry;
//! - `validate-config` — parse and validate a config without running it;
//! - `profile-info` — print the structural parameters of a variance
//!   profile (spectral gaps δ±, bandwidth parameter M, C_inf/C_sup).
//!
//! Exit codes: 0 — success (all acceptance checks passed); 1 — usage,
//! configuration, or runtime error; 2 — the run completed but at least one
//! acceptance check failed.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rmt_experiments::config::ProfileConfig;
use rmt_experiments::report::write_outputs;
use rmt_experiments::{list_experiments, run_experiment, RunConfig};

/// Environment variable consulted when `--threads` and the config key are
/// both absent.
const THREADS_ENV: &str = "RMT_LAB_THREADS";

#[derive(Parser)]
#[command(
    name = "rmt-lab",
    about = "Seeded Monte-Carlo experiments on generalized Wigner matrices",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a JSON configuration file.
    Run {
        /// Path to the JSON run configuration.
        #[arg(long)]
        config: PathBuf,
        /// Override the master seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (default: config key, then RMT_LAB_THREADS, then
        /// the number of available cores). Results are identical for every
        /// thread count.
        #[arg(long)]
        threads: Option<usize>,
        /// Output directory (default: config key `out_dir`, then
        /// `rmt-lab-out`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the experiments the `run` subcommand accepts.
    ListExperiments,
    /// Parse and validate a configuration without running anything.
    ValidateConfig {
        /// Path to the JSON run configuration.
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the structural parameters of a variance profile.
    ProfileInfo {
        /// Inline profile JSON, e.g. '{"type":"band","w":16.0,"shape":"uniform"}'.
        /// Defaults to the `profile` key of --config, or the flat profile.
        #[arg(long)]
        spec: Option<String>,
        /// Read the profile (and dimension) from this run configuration.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Dimension to build the profile at.
        #[arg(long, default_value_t = 128)]
        n: usize,
    },
}

fn main() -> ExitCode {
    // Sample-level parallelism lives in the experiment harness; keep the
    // BLAS kernels single-threaded so reductions are deterministic and the
    // worker pool is not oversubscribed. Respect an explicit override.
    if std::env::var_os("OPENBLAS_NUM_THREADS").is_none() {
        std::env::set_var("OPENBLAS_NUM_THREADS", "1");
    }
    match Cli::parse().command {
        Command::Run { config, seed, threads, out } => run(&config, seed, threads, out),
        Command::ListExperiments => {
            for name in list_experiments() {
                println!("{name}");
            }
            ExitCode::SUCCESS
        }
        Command::ValidateConfig { config } => match load_config(&config, None) {
            Ok(parsed) => {
                println!("ok: {} (seed {})", parsed.experiment, parsed.seed);
                ExitCode::SUCCESS
            }
            Err(message) => {
                eprintln!("{message}");
                ExitCode::FAILURE
            }
        },
        Command::ProfileInfo { spec, config, n } => profile_info(spec, config, n),
    }
}

/// Read and validate a config file, applying the optional seed override.
fn load_config(path: &Path, seed: Option<u64>) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("error: cannot read {}: {e}", path.display()))?;
    let mut config =
        RunConfig::from_json(&text).map_err(|e| format!("error: {e}"))?;
    if let Some(s) = seed {
        config.seed = s;
        config.validate().map_err(|e| format!("error: {e}"))?;
    }
    Ok(config)
}

fn resolve_threads(flag: Option<usize>, config: &RunConfig) -> usize {
    flag.or(config.threads)
        .or_else(|| {
            std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok())
        })
        .unwrap_or_else(|| {
            std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1)
        })
        .max(1)
}

fn run(
    config_path: &Path,
    seed: Option<u64>,
    threads: Option<usize>,
    out: Option<PathBuf>,
) -> ExitCode {
    let config = match load_config(config_path, seed) {
        Ok(c) => c,
        Err(message) => {
            eprintln!("{message}");
            return ExitCode::FAILURE;
        }
    };
    let threads = resolve_threads(threads, &config);
    let out_dir = out
        .or_else(|| config.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("rmt-lab-out"));

    let report = match run_experiment(&config, threads) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };

    // The manifest digests the exact configuration the run resolved to
    // (seed override included), not the file bytes.
    if let Err(e) = write_outputs(&report, &config.to_json(), &out_dir) {
        eprintln!("error: {e}");
        return ExitCode::FAILURE;
    }

    println!(
        "{}: {} cells, {} exponents, {:.1}s wall clock",
        report.experiment,
        report.cells.len(),
        report.exponents.len(),
        report.wall_clock_seconds
    );
    for check in &report.checks {
        println!(
            "  [{}] {}: {}",
            if check.passed { "pass" } else { "FAIL" },
            check.rule,
            check.detail
        );
    }
    println!("outputs written to {}", out_dir.display());

    if report.passed() {
        ExitCode::SUCCESS
    } else {
        eprintln!("one or more acceptance checks failed");
        ExitCode::from(2)
    }
}

fn profile_info(spec: Option<String>, config: Option<PathBuf>, n: usize) -> ExitCode {
    let profile_config: ProfileConfig = if let Some(text) = spec {
        match serde_json::from_str(&text) {
            Ok(p) => p,
            Err(e) => {
                eprintln!("error: invalid profile spec: {e}");
                return ExitCode::FAILURE;
            }
        }
    } else if let Some(path) = config {
        match load_config(&path, None) {
            Ok(c) => c.profile_or_wigner(),
            Err(message) => {
                eprintln!("{message}");
                return ExitCode::FAILURE;
            }
        }
    } else {
        ProfileConfig::Wigner
    };
    let profile = match profile_config.build(n) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    let (delta_minus, delta_plus, has_gap) = profile.spectral_gap();
    println!("profile: {}", profile_config.label());
    println!("n: {}", profile.n());
    println!("M (1/max sigma^2): {:.6e}", profile.m_param());
    println!("C_inf (N min sigma^2): {:.6}", profile.c_inf());
    println!("C_sup (N max sigma^2): {:.6}", profile.c_sup());
    println!("delta_minus: {delta_minus:.6}");
    println!("delta_plus: {delta_plus:.6}");
    println!("spectral gap certified: {has_gap}");
    println!("row-sum residual: {:.3e}", profile.row_sum_residual());
    ExitCode::SUCCESS
}
