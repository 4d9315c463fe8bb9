#![forbid(unsafe_code)]

//! Seeded Monte-Carlo experiments over the random-matrix core.
//!
//! Five experiments, each a pure function of (configuration, master seed):
//!
//! - [`local_law::local_law_scan`] — resolvent deviations over an (E, η)
//!   grid, η-slope fits, and eigenvector delocalization;
//! - [`swap::four_moment_swap`] — matched vs control entry-law swaps of
//!   smooth resolvent statistics with common-random-number pairing;
//! - [`walks::trace_moment_bound`] — ordered-closed-walk census against the
//!   entropy bound, plus Monte-Carlo trace moments against the Catalan
//!   limits;
//! - [`ldp::ldp_tails`] — stretched-exponential tail envelopes for linear
//!   and quadratic forms in independent entries;
//! - [`gaps::gap_universality`] — two-ensemble comparison of unfolded bulk
//!   spacing distributions by a Kolmogorov–Smirnov test.
//!
//! [`run_experiment`] dispatches on the configured experiment name,
//! measures wall-clock time, and returns the populated
//! [`report::ExperimentReport`]; [`report::write_outputs`] materializes
//! `report.json`, `cells.csv`, and `manifest.json`.

pub mod config;
pub mod error;
pub mod gaps;
pub mod harness;
pub mod ldp;
pub mod local_law;
pub mod report;
pub mod swap;
pub mod walks;

pub use config::RunConfig;
pub use error::ExperimentError;
pub use report::ExperimentReport;

/// Names accepted in the `experiment` config key, in display order.
pub fn list_experiments() -> Vec<&'static str> {
    vec![
        "local_law_scan",
        "four_moment_swap",
        "trace_moment_bound",
        "ldp_tails",
        "gap_universality",
    ]
}

/// Validate and run the configured experiment on `threads` workers.
pub fn run_experiment(
    config: &RunConfig,
    threads: usize,
) -> Result<ExperimentReport, ExperimentError> {
    config.validate()?;
    let started = std::time::Instant::now();
    let mut report = match config.experiment.as_str() {
        "local_law_scan" => local_law::local_law_scan(config, threads)?,
        "four_moment_swap" => swap::four_moment_swap(config, threads)?,
        "trace_moment_bound" => walks::trace_moment_bound(config, threads)?,
        "ldp_tails" => ldp::ldp_tails(config, threads)?,
        "gap_universality" => gaps::gap_universality(config, threads)?,
        other => {
            return Err(ExperimentError::config(
                "experiment",
                format!("unknown experiment `{other}`"),
            ))
        }
    };
    report.wall_clock_seconds = started.elapsed().as_secs_f64();
    Ok(report)
}
