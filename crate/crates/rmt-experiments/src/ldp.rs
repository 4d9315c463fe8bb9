//! Stretched-exponential tail envelopes for linear and quadratic forms in
//! independent standardized entries.
//!
//! For entries with a subexponential tail certificate of decay rate α, the
//! three statistic families obey
//!
//!   P(|X| ≥ D·σ_X) ≤ C · exp(−c · D^p),    p = p(mode, α):
//!
//!   - linear        X = Σ aᵢAᵢ,            p = 2/(2+α);
//!   - quadratic     X = Σ Bᵢᵢ(Aᵢ²−1),      p = 1/(1+α);
//!   - quadratic     X = Σ_{i≠j} BᵢⱼAᵢAⱼ,   p = 1/(2(1+α)).
//!
//! σ_X is the exact standard deviation of X, computable from the
//! coefficients and the fourth moment. The experiment estimates the tail at
//! each deviation level D, fits log P against D^p to extract the rate c,
//! and reports the envelope constant C* = max_D P̂(D)·exp(c·D^p), so that
//! the fitted pair (C*, c) dominates every observed tail point.

use crate::config::{RunConfig, TailMode};
use crate::error::ExperimentError;
use crate::harness::{bootstrap_replicates, map_samples, TAG_LDP};
use crate::report::{exponent_from_bootstrap, CellReport, ExperimentReport, PassRecord};
use rand::Rng;
use rmt_core::entrylaws::EntryLaw;
use rmt_core::numerics::rng::{derive_rng, DOMAIN_AUX, DOMAIN_EXPERIMENT};
use rmt_core::numerics::stats::{linear_fit, normal_cdf};

/// Default dimension of generated coefficient vectors/matrices.
pub const DEFAULT_DIMENSION: usize = 32;

/// Coefficients for one tail statistic, with the exact scale σ_X.
#[derive(Debug, Clone)]
pub struct TailStatistic {
    mode: TailMode,
    /// Linear coefficients (linear mode) or flattened symmetric matrix.
    linear: Vec<f64>,
    matrix: Vec<Vec<f64>>,
    pub scale: f64,
}

impl TailStatistic {
    /// Assemble from explicit coefficients or a seeded standard-normal
    /// draw of dimension `dim`; validates shape and nondegeneracy.
    pub fn build(
        mode: TailMode,
        coefficients: Option<&[f64]>,
        matrix_b: Option<&[Vec<f64>]>,
        law: &EntryLaw,
        dim: usize,
        master: u64,
    ) -> Result<Self, ExperimentError> {
        let (_, _, _, m4) = law.exact_moments();
        match mode {
            TailMode::Linear => {
                let a: Vec<f64> = match coefficients {
                    Some(c) => c.to_vec(),
                    None => {
                        let mut rng = derive_rng(master, &[DOMAIN_AUX, TAG_LDP, 0]);
                        (0..dim).map(|_| standard_normal(&mut rng)).collect()
                    }
                };
                if a.is_empty() {
                    return Err(ExperimentError::config("coefficients", "must be nonempty"));
                }
                let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt();
                if !(scale > 0.0) {
                    return Err(ExperimentError::config("coefficients", "must not be all zero"));
                }
                Ok(TailStatistic { mode, linear: a, matrix: vec![], scale })
            }
            TailMode::QuadraticDiag | TailMode::QuadraticOffdiag => {
                let b: Vec<Vec<f64>> = match matrix_b {
                    Some(rows) => {
                        let n = rows.len();
                        if rows.iter().any(|r| r.len() != n) {
                            return Err(ExperimentError::config("matrix_b", "must be square"));
                        }
                        for i in 0..n {
                            for j in 0..i {
                                if (rows[i][j] - rows[j][i]).abs() > 1e-12 {
                                    return Err(ExperimentError::config(
                                        "matrix_b",
                                        "must be symmetric",
                                    ));
                                }
                            }
                        }
                        rows.to_vec()
                    }
                    None => {
                        let mut rng = derive_rng(master, &[DOMAIN_AUX, TAG_LDP, 1]);
                        let mut rows = vec![vec![0.0; dim]; dim];
                        for i in 0..dim {
                            for j in i..dim {
                                let x = standard_normal(&mut rng);
                                rows[i][j] = x;
                                rows[j][i] = x;
                            }
                        }
                        rows
                    }
                };
                let n = b.len();
                let scale2 = if mode == TailMode::QuadraticDiag {
                    // Var Σ Bᵢᵢ(Aᵢ²−1) = (m₄ − 1) Σ Bᵢᵢ².
                    (m4 - 1.0) * (0..n).map(|i| b[i][i] * b[i][i]).sum::<f64>()
                } else {
                    // Var Σ_{i≠j} BᵢⱼAᵢAⱼ = 2 Σ_{i≠j} Bᵢⱼ² for symmetric B.
                    2.0 * (0..n)
                        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                        .map(|(i, j)| b[i][j] * b[i][j])
                        .sum::<f64>()
                };
                if !(scale2 > 0.0) {
                    let key = if matrix_b.is_some() { "matrix_b" } else { "law" };
                    return Err(ExperimentError::config(
                        key,
                        "statistic is degenerate (zero variance); for quadratic_diag this \
                         requires m4 > 1",
                    ));
                }
                Ok(TailStatistic { mode, linear: vec![], matrix: b, scale: scale2.sqrt() })
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self.mode {
            TailMode::Linear => self.linear.len(),
            _ => self.matrix.len(),
        }
    }

    /// The raw (un-normalized) statistic on one entry vector.
    pub fn evaluate(&self, a: &[f64]) -> f64 {
        match self.mode {
            TailMode::Linear => self.linear.iter().zip(a).map(|(c, x)| c * x).sum(),
            TailMode::QuadraticDiag => {
                (0..a.len()).map(|i| self.matrix[i][i] * (a[i] * a[i] - 1.0)).sum()
            }
            TailMode::QuadraticOffdiag => {
                let n = a.len();
                let mut out = 0.0;
                for i in 0..n {
                    for j in (i + 1)..n {
                        out += 2.0 * self.matrix[i][j] * a[i] * a[j];
                    }
                }
                out
            }
        }
    }
}

fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // Box–Muller; one value per call keeps the stream layout simple.
    let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let v: f64 = rng.random();
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

/// Run the tail experiment described by `config`.
pub fn ldp_tails(config: &RunConfig, threads: usize) -> Result<ExperimentReport, ExperimentError> {
    let mode = config.mode.unwrap_or(TailMode::Linear);
    let law = config.law_or_gaussian().build()?;
    let dim = config.n_or(DEFAULT_DIMENSION);
    let samples = config.samples_or(100_000);
    let master = config.seed;
    let statistic = TailStatistic::build(
        mode,
        config.coefficients.as_deref(),
        config.matrix_b.as_deref(),
        &law,
        dim,
        master,
    )?;
    if config.d_grid.iter().filter(|&&d| d > 0.0).count() < 3 {
        return Err(ExperimentError::config(
            "d_grid",
            "need at least three positive deviation levels to fit a decay rate",
        ));
    }

    let alpha = law.subexp().alpha;
    let p = mode.exponent(alpha);
    let dim_actual = statistic.dim();

    // Normalized deviations |X|/σ_X, one per sample.
    let normalized: Vec<f64> = map_samples(threads, samples, |s| {
        let mut rng = derive_rng(master, &[DOMAIN_EXPERIMENT, TAG_LDP, s as u64]);
        let a = law.sample(&mut rng, dim_actual);
        (statistic.evaluate(&a) / statistic.scale).abs()
    });

    let tail_at = |idx: &[usize], d: f64| -> f64 {
        idx.iter().filter(|&&i| normalized[i] >= d).count() as f64 / idx.len() as f64
    };
    let all_idx: Vec<usize> = (0..samples).collect();

    let mut cells = Vec::new();
    let mut checks = Vec::new();

    let mut fit_d = Vec::new();
    let mut fit_log_tail = Vec::new();
    let mut tails = Vec::new();
    for &d in &config.d_grid {
        let t = tail_at(&all_idx, d);
        // Binomial standard error; the 1/S floor keeps zero cells honest.
        let se = (t * (1.0 - t) / samples as f64).sqrt().max(1.0 / samples as f64);
        let cell = format!("D={d:.4e}");
        cells.push(CellReport::scalar(&cell, "tail", t, samples));
        cells.push(CellReport::scalar(&cell, "tail_std_error", se, samples));
        tails.push((d, t, se));
        if d > 0.0 && t > 0.0 {
            fit_d.push(d.powf(p));
            fit_log_tail.push(t.ln());
        }
    }

    // --- decay-rate fit ----------------------------------------------------
    let mut exponents = Vec::new();
    if fit_d.len() >= 2 {
        let fit = linear_fit(&fit_d, &fit_log_tail);
        let c_rate = -fit.slope;
        let replicates = bootstrap_replicates(master, TAG_LDP, &[0], samples, |idx| {
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for &(d, _, _) in &tails {
                if d <= 0.0 {
                    continue;
                }
                let t = tail_at(idx, d);
                if t > 0.0 {
                    xs.push(d.powf(p));
                    ys.push(t.ln());
                }
            }
            if xs.len() >= 2 {
                -linear_fit(&xs, &ys).slope
            } else {
                c_rate
            }
        });
        exponents.push(exponent_from_bootstrap("decay_rate", c_rate, &replicates));
        cells.push(CellReport::scalar("fit", "tail_exponent", p, 1));

        // Envelope constant: smallest C with P̂(D) ≤ C·exp(−c·D^p) at every
        // observed level.
        let c_env = tails
            .iter()
            .map(|&(d, t, _)| t * (c_rate * d.powf(p)).exp())
            .fold(f64::NEG_INFINITY, f64::max);
        cells.push(CellReport::scalar("fit", "envelope_constant", c_env, 1));

        checks.push(PassRecord::new(
            "positive_decay_rate",
            c_rate > 0.0,
            format!("fitted c = {c_rate:.4} at exponent p = {p:.4}"),
        ));
        let envelope_ok = tails
            .iter()
            .all(|&(d, t, _)| t <= c_env * (-c_rate * d.powf(p)).exp() * (1.0 + 1e-9));
        checks.push(PassRecord::new(
            "envelope_dominates",
            envelope_ok,
            format!("C* = {c_env:.4}, c = {c_rate:.4}"),
        ));
    } else {
        checks.push(PassRecord::new(
            "positive_decay_rate",
            false,
            "fewer than two positive tail estimates; increase samples or lower d_grid".to_string(),
        ));
    }

    // --- exact oracles -----------------------------------------------------
    if let Some(&(_, t0, _)) = tails.iter().find(|&&(d, _, _)| d == 0.0) {
        checks.push(PassRecord::new(
            "zero_deviation_tail_is_one",
            t0 == 1.0,
            format!("P(|X| >= 0) = {t0}"),
        ));
    }
    let gaussian_linear = mode == TailMode::Linear && config.law_or_gaussian() == crate::config::LawConfig::Gaussian;
    if gaussian_linear {
        // Any linear combination of iid Gaussians is Gaussian, so the
        // normalized tail is 2Φ(−D) exactly, for every coefficient vector.
        if let Some(&(d, t, se)) = tails.iter().find(|&&(d, _, _)| (d - 3.0).abs() < 1e-12) {
            let exact = 2.0 * normal_cdf(-3.0);
            let ok = (t - exact).abs() <= 4.0 * se;
            checks.push(PassRecord::new(
                "gaussian_linear_oracle",
                ok,
                format!(
                    "P(|X| >= {d}sigma) = {t:.6e} vs exact {exact:.6e} ({:.2} se)",
                    (t - exact).abs() / se
                ),
            ));
        }
    }

    Ok(ExperimentReport {
        experiment: "ldp_tails".to_string(),
        parameters: serde_json::to_value(config).expect("config serializes"),
        master_seed: master,
        cells,
        exponents,
        checks,
        wall_clock_seconds: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::LawConfig;

    fn base_config(extra: &str) -> RunConfig {
        RunConfig::from_json(&format!(
            r#"{{
                "experiment": "ldp_tails",
                "seed": 2024,
                "d_grid": [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0],
                "samples": 100000{extra}
            }}"#
        ))
        .unwrap()
    }

    #[test]
    fn exponents_follow_the_three_mode_formulas() {
        assert!((TailMode::Linear.exponent(1.0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((TailMode::QuadraticDiag.exponent(1.0) - 0.5).abs() < 1e-15);
        assert!((TailMode::QuadraticOffdiag.exponent(1.0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn two_variable_quadratic_statistic_matches_hand_expansion() {
        // B = [[0, 1], [1, 0]]: the off-diagonal statistic is exactly 2A₁A₂,
        // with Var = 4·E[A₁²]·E[A₂²] = 4, so the scale is 2.
        let law = EntryLaw::gaussian();
        let b = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let stat = TailStatistic::build(
            TailMode::QuadraticOffdiag,
            None,
            Some(&b),
            &law,
            2,
            0,
        )
        .unwrap();
        assert!((stat.scale - 2.0).abs() < 1e-14);
        assert!((stat.evaluate(&[3.0, 0.5]) - 3.0).abs() < 1e-14);
        // Diagonal mode on the same matrix is degenerate.
        let err =
            TailStatistic::build(TailMode::QuadraticDiag, None, Some(&b), &law, 2, 0).unwrap_err();
        assert!(matches!(err, ExperimentError::ConfigInvalid { .. }));
    }

    #[test]
    fn diagonal_statistic_variance_uses_the_fourth_moment() {
        // Gaussian: m₄ = 3, Var(A²−1) = 2; B = diag(1, 2) ⇒ σ² = 2·5 = 10.
        let law = EntryLaw::gaussian();
        let b = vec![vec![1.0, 0.0], vec![0.0, 2.0]];
        let stat =
            TailStatistic::build(TailMode::QuadraticDiag, None, Some(&b), &law, 2, 0).unwrap();
        assert!((stat.scale - 10f64.sqrt()).abs() < 1e-14);
        // Statistic at a = (2, 1): 1·(4−1) + 2·(1−1) = 3.
        assert!((stat.evaluate(&[2.0, 1.0]) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn bernoulli_diag_mode_is_rejected_as_degenerate() {
        // A² ≡ 1 for symmetric Bernoulli, so the centered diagonal statistic
        // vanishes identically.
        let law = EntryLaw::bernoulli();
        let err = TailStatistic::build(TailMode::QuadraticDiag, None, None, &law, 8, 3).unwrap_err();
        match err {
            ExperimentError::ConfigInvalid { key, .. } => assert_eq!(key, "law"),
            other => panic!("wrong error: {other:?}"),
        }
    }

    #[test]
    fn gaussian_linear_tail_matches_the_normal_law() {
        let config = base_config("");
        let report = ldp_tails(&config, 4).unwrap();
        assert!(report.passed(), "{:#?}", report.checks);
        assert!(report.check("gaussian_linear_oracle").passed);
        // The D = 0 cell is exactly 1.
        assert_eq!(report.cell("D=0.0000e0", "tail").mean, 1.0);
        // Midpoint sanity: P(|N| >= 1) = 2Φ(−1) ≈ 0.3173.
        let t1 = report.cell("D=1.0000e0", "tail").mean;
        assert!((t1 - 0.3173).abs() < 0.01, "t(1) = {t1}");
        // The decay-rate bootstrap error is finite and positive.
        assert_eq!(report.exponents[0].name, "decay_rate");
        assert!(report.exponents[0].std_error > 0.0);
    }

    #[test]
    fn bernoulli_offdiag_tails_decay_with_positive_rate() {
        let config = base_config(
            r#", "law": {"type": "bernoulli"}, "mode": "quadratic_offdiag", "n_list": [16]"#,
        );
        let report = ldp_tails(&config, 4).unwrap();
        assert!(report.check("positive_decay_rate").passed, "{:#?}", report.checks);
        assert!(report.check("envelope_dominates").passed);
        // Tail exponent for α = 1 entries in the off-diagonal mode is 1/4.
        assert_eq!(report.cell("fit", "tail_exponent").mean, 0.25);
    }

    #[test]
    fn supplied_singleton_coefficients_reduce_to_one_entry() {
        // a = e₁ makes X = A₁; with Gaussian entries t(2) ≈ 2Φ(−2) ≈ 0.0455.
        let config = base_config(r#", "coefficients": [1.0]"#);
        let report = ldp_tails(&config, 4).unwrap();
        let t2 = report.cell("D=2.0000e0", "tail").mean;
        assert!((t2 - 0.0455).abs() < 0.005, "t(2) = {t2}");
    }

    #[test]
    fn tails_are_deterministic_across_thread_counts() {
        let config = base_config("");
        let a = ldp_tails(&config, 1).unwrap();
        let b = ldp_tails(&config, 8).unwrap();
        assert_eq!(a.cells, b.cells);
        assert_eq!(a.exponents, b.exponents);
        assert_eq!(a.checks, b.checks);
    }
}
