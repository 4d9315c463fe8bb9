//! Local semicircle law scan: resolvent deviations over an (E, η) grid.
//!
//! For each grid point z = E + iη the scan measures, per sample,
//!
//! - Λ_d  = max_i |G_ii(z) − m_sc(z)|   (pointwise diagonal deviation),
//! - max_{i≠j} |G_ij(z)|                 (off-diagonal size),
//! - |m_N(z) − m_sc(z)|                  (trace-averaged deviation),
//!
//! and summarizes each over the Monte-Carlo samples. The local law
//! predicts both Λ_d and the off-diagonal maximum to be O((Mη)^{−1/2}) up
//! to logs inside the bulk, so the fitted slope of log median vs log η
//! should sit near −1/2; the trace average gains an extra full power and
//! sits well below the pointwise deviation. Grid points too close to the
//! edge for the deviation parameter (Mη)^{−1/2} to be small against κ(E)²
//! are flagged inadmissible and skipped.
//!
//! Eigenvector delocalization rides along: a sample's sup-norm over bulk
//! modes must stay below 10·√(log N / N) in at least 99% of samples.

use crate::config::RunConfig;
use crate::error::ExperimentError;
use crate::harness::{bootstrap_replicates, map_samples, sample_seed, TAG_LOCAL_LAW};
use crate::report::{exponent_from_bootstrap, CellReport, ExperimentReport, PassRecord};
use rmt_core::ensembles::sample_matrix;
use rmt_core::numerics::stats::{linear_fit, quantile_sorted};
use rmt_core::resolvent::ResolventCache;
use rmt_core::semicircle::{control_g, kappa, msc};
use rmt_core::C64;

/// Default admissibility threshold: (Mη)^{−1/2} ≤ threshold · κ(E)².
pub const DEFAULT_ADMISSIBILITY: f64 = 10.0;

/// Delocalization bound factor: sup-norm ≤ factor·√(log N / N).
pub const DELOCALIZATION_FACTOR: f64 = 10.0;

/// Minimum fraction of samples that must satisfy the delocalization bound.
pub const DELOCALIZATION_QUORUM: f64 = 0.99;

/// Acceptance band for the fitted η-slopes of Λ_d and the off-diagonal
/// maximum (theory: −1/2).
pub const SLOPE_BAND: (f64, f64) = (-0.7, -0.3);

/// Is the grid point admissible for the deviation analysis?
pub fn admissible(e: f64, eta: f64, m_param: f64, threshold: f64) -> bool {
    1.0 / (m_param * eta).sqrt() <= threshold * kappa(e) * kappa(e)
}

/// Stable cell identifier for a grid point.
fn cell_id(e: f64, eta: f64) -> String {
    format!("E={e:+.4e},eta={eta:.4e}")
}

struct SampleOutput {
    /// Per admissible cell, in grid order: (Λ_d, offdiag max, m_N).
    cells: Vec<(f64, f64, C64)>,
    /// Sup-norm over bulk eigenvectors.
    deloc_sup: f64,
}

/// Run the scan described by `config`.
pub fn local_law_scan(config: &RunConfig, threads: usize) -> Result<ExperimentReport, ExperimentError> {
    let n = config.n_or(500);
    let samples = config.samples_or(100);
    let class = config.class_or_default();
    let profile = config.profile_or_wigner().build(n)?;
    let law = config.law_or_gaussian().build()?;
    let threshold = config.admissibility.unwrap_or(DEFAULT_ADMISSIBILITY);
    let bulk = config.window_or((-1.0, 1.0));
    let master = config.seed;

    let m_param = profile.m_param();
    let delta_plus = profile.delta_plus();

    // Fixed grid-order list of admissible points.
    let mut grid = Vec::new();
    for &e in &config.e_grid {
        for &eta in &config.eta_grid {
            grid.push((e, eta, admissible(e, eta, m_param, threshold)));
        }
    }
    let admissible_points: Vec<(f64, f64)> =
        grid.iter().filter(|&&(_, _, ok)| ok).map(|&(e, eta, _)| (e, eta)).collect();

    let outputs: Vec<SampleOutput> = map_samples(threads, samples, |s| {
        let seed = sample_seed(master, TAG_LOCAL_LAW, s);
        let h = sample_matrix(&profile, &law, class, seed);
        let cache = ResolventCache::new(&h).expect("eigensolve");

        let mut cells = Vec::with_capacity(admissible_points.len());
        for &(e, eta) in &admissible_points {
            let z = C64::new(e, eta);
            let (eval, _) = cache.evaluate(z).expect("resolvent evaluation");
            cells.push((eval.lambda_d, eval.offdiag_max, eval.m_n));
        }

        // Delocalization over bulk modes; the bulk window always contains
        // eigenvalues at the sizes this experiment runs at.
        let mut deloc_sup = 0.0f64;
        let vectors = cache.vectors();
        for (k, &lambda) in cache.eigenvalues().iter().enumerate() {
            if lambda < bulk.0 || lambda > bulk.1 {
                continue;
            }
            for i in 0..cache.n() {
                deloc_sup = deloc_sup.max(vectors[(i, k)].norm());
            }
        }
        SampleOutput { cells, deloc_sup }
    });

    let mut cells_out = Vec::new();
    let mut checks = Vec::new();
    let mut exponents = Vec::new();

    // --- per-cell summaries ------------------------------------------------
    // lambda_values[cell_index][sample] for the slope fits below.
    let mut lambda_values: Vec<Vec<f64>> = vec![Vec::new(); admissible_points.len()];
    let mut offdiag_values: Vec<Vec<f64>> = vec![Vec::new(); admissible_points.len()];

    let mut admissible_index = 0usize;
    for &(e, eta, ok) in &grid {
        let id = cell_id(e, eta);
        if !ok {
            for statistic in ["lambda_d", "offdiag_max", "averaged_gap", "envelope"] {
                cells_out.push(CellReport::skipped(&id, statistic));
            }
            continue;
        }
        let z = C64::new(e, eta);
        let m_ref = msc(z)?;
        let lambda: Vec<f64> =
            outputs.iter().map(|o| o.cells[admissible_index].0).collect();
        let offdiag: Vec<f64> =
            outputs.iter().map(|o| o.cells[admissible_index].1).collect();
        let averaged: Vec<f64> =
            outputs.iter().map(|o| (o.cells[admissible_index].2 - m_ref).norm()).collect();
        cells_out.push(CellReport::from_samples(&id, "lambda_d", &lambda));
        cells_out.push(CellReport::from_samples(&id, "offdiag_max", &offdiag));
        cells_out.push(CellReport::from_samples(&id, "averaged_gap", &averaged));
        // Theoretical deviation envelope (up to constants and logs):
        // (κ+η)^{1/4} / (√(Mη) · g(z)).
        let envelope = (kappa(e) + eta).powf(0.25)
            / ((m_param * eta).sqrt() * control_g(z, delta_plus)?);
        cells_out.push(CellReport::scalar(&id, "envelope", envelope, 1));
        lambda_values[admissible_index] = lambda;
        offdiag_values[admissible_index] = offdiag;
        admissible_index += 1;
    }

    // --- per-energy slope fits --------------------------------------------
    for (e_index, &e) in config.e_grid.iter().enumerate() {
        // Admissible etas at this energy, with their admissible index.
        let mut etas = Vec::new();
        let mut indices = Vec::new();
        let mut admissible_cursor = 0usize;
        for &(ge, geta, ok) in &grid {
            if !ok {
                continue;
            }
            if (ge - e).abs() < 1e-15 {
                etas.push(geta);
                indices.push(admissible_cursor);
            }
            admissible_cursor += 1;
        }
        if etas.len() < 3 {
            continue;
        }
        let log_eta: Vec<f64> = etas.iter().map(|&x| x.ln()).collect();

        for (name, values) in
            [("lambda_d", &lambda_values), ("offdiag", &offdiag_values)]
        {
            let median_at = |idx: &[usize], cell: usize| -> f64 {
                let mut v: Vec<f64> = idx.iter().map(|&s| values[cell][s]).collect();
                v.sort_by(f64::total_cmp);
                quantile_sorted(&v, 0.5)
            };
            let all: Vec<usize> = (0..samples).collect();
            let log_median: Vec<f64> =
                indices.iter().map(|&c| median_at(&all, c).ln()).collect();
            let fit = linear_fit(&log_eta, &log_median);
            let slope = fit.slope;
            let replicates = bootstrap_replicates(
                master,
                TAG_LOCAL_LAW,
                &[e_index as u64, if name == "lambda_d" { 0 } else { 1 }],
                samples,
                |idx| {
                    let log_median: Vec<f64> =
                        indices.iter().map(|&c| median_at(idx, c).ln()).collect();
                    linear_fit(&log_eta, &log_median).slope
                },
            );
            let label = format!("{name}_slope@E={e:+.4e}");
            exponents.push(exponent_from_bootstrap(&label, slope, &replicates));
            let in_band = (SLOPE_BAND.0..=SLOPE_BAND.1).contains(&slope);
            checks.push(PassRecord::new(
                &format!("{name}_slope_in_band@E={e:+.4e}"),
                in_band,
                format!(
                    "slope {slope:.3} over {} etas; acceptance band [{}, {}]",
                    etas.len(),
                    SLOPE_BAND.0,
                    SLOPE_BAND.1
                ),
            ));
        }
    }

    // --- delocalization ----------------------------------------------------
    let bound = DELOCALIZATION_FACTOR * ((n as f64).ln() / n as f64).sqrt();
    let sups: Vec<f64> = outputs.iter().map(|o| o.deloc_sup).collect();
    let ok_fraction =
        sups.iter().filter(|&&s| s <= bound).count() as f64 / samples as f64;
    cells_out.push(CellReport::from_samples("global", "delocalization_sup", &sups));
    cells_out.push(CellReport::scalar("global", "delocalization_ok_fraction", ok_fraction, samples));
    checks.push(PassRecord::new(
        "delocalization_quorum",
        ok_fraction >= DELOCALIZATION_QUORUM,
        format!(
            "{:.1}% of samples under the bound {bound:.4} (need {:.0}%)",
            100.0 * ok_fraction,
            100.0 * DELOCALIZATION_QUORUM
        ),
    ));

    Ok(ExperimentReport {
        experiment: "local_law_scan".to_string(),
        parameters: serde_json::to_value(config).expect("config serializes"),
        master_seed: master,
        cells: cells_out,
        exponents,
        checks,
        wall_clock_seconds: 0.0,
    })
}
