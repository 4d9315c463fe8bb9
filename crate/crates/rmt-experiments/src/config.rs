//! JSON run configuration: parsing, defaulting, and validation.
//!
//! A run is fully described by one JSON object. Two keys are always
//! required — `experiment` and `seed` — everything else is optional with
//! per-experiment defaults. Unknown keys are rejected, and every validation
//! failure names the offending key.

use serde::{Deserialize, Serialize};

use crate::error::ExperimentError;
use rmt_core::ensembles::SymmetryClass;
use rmt_core::entrylaws::EntryLaw;
use rmt_core::profiles::{band_profile, generalized_profile, wigner_profile, BandShape,
    VarianceProfile};

use ndarray::Array2;

/// Default Gaussian-divisibility share used by the matched-partner
/// construction in the four-moment experiment.
pub const DEFAULT_GAMMA: f64 = 0.2;
/// Default tolerance handed to the moment-matching law builder.
pub const DEFAULT_MATCH_DELTA: f64 = 0.01;

/// Variance-profile choice, independent of the dimension it is built at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileConfig {
    /// Constant profile σ²_ij = 1/N.
    Wigner,
    /// Periodic band of half-width `w` with the given shape.
    Band { w: f64, shape: BandShape },
    /// Two diagonal blocks with weights `low`/`high` and cross-block weight
    /// `cross` (default 1), Sinkhorn-scaled to doubly stochastic.
    ///
    /// The post-scaling spread is governed by cross²/(low·high): at equality
    /// the weights are rank-one and Sinkhorn flattens them completely, and
    /// with equal block sizes the two diagonal blocks always equalize, so
    /// a small `cross` is what makes the profile decidedly nonconstant.
    TwoBlock {
        low: f64,
        high: f64,
        #[serde(default = "default_cross_weight")]
        cross: f64,
    },
}

fn default_cross_weight() -> f64 {
    1.0
}

impl ProfileConfig {
    /// Build the profile at dimension `n`.
    pub fn build(&self, n: usize) -> Result<VarianceProfile, ExperimentError> {
        match self {
            ProfileConfig::Wigner => Ok(wigner_profile(n)),
            ProfileConfig::Band { w, shape } => Ok(band_profile(n, *w, *shape)?),
            ProfileConfig::TwoBlock { low, high, cross } => {
                if !(*low > 0.0) || !(*high > 0.0) || !(*cross > 0.0) {
                    return Err(ExperimentError::config(
                        "profile",
                        "two_block weights must be positive",
                    ));
                }
                let half = n / 2;
                let mut weights = Array2::<f64>::from_elem((n, n), *cross);
                for i in 0..n {
                    for j in 0..n {
                        if i < half && j < half {
                            weights[(i, j)] = *low;
                        } else if i >= half && j >= half {
                            weights[(i, j)] = *high;
                        }
                    }
                }
                Ok(generalized_profile(&weights)?)
            }
        }
    }

    /// Short stable label used in cell identifiers.
    pub fn label(&self) -> String {
        match self {
            ProfileConfig::Wigner => "wigner".to_string(),
            ProfileConfig::Band { w, .. } => format!("band_w{w}"),
            ProfileConfig::TwoBlock { .. } => "two_block".to_string(),
        }
    }
}

/// Entry-law choice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum LawConfig {
    Gaussian,
    Bernoulli,
    TwoGaussianMixture { a: f64, b: f64, sigma: f64 },
    GaussianDivisible { base: Box<LawConfig>, gamma: f64 },
    /// Smooth law constructed to given third and fourth moments.
    Matched { m3: f64, m4: f64 },
    /// Gaussian-divisible law whose final moments equal (m3, m4): the base is
    /// built with the divisibility relations inverted, so mixing with share
    /// `gamma` lands exactly on the targets.
    MatchedDivisible { m3: f64, m4: f64, gamma: f64 },
}

impl LawConfig {
    pub fn build(&self) -> Result<EntryLaw, ExperimentError> {
        match self {
            LawConfig::Gaussian => Ok(EntryLaw::gaussian()),
            LawConfig::Bernoulli => Ok(EntryLaw::bernoulli()),
            LawConfig::TwoGaussianMixture { a, b, sigma } => {
                Ok(EntryLaw::two_gaussian_mixture(*a, *b, *sigma)?)
            }
            LawConfig::GaussianDivisible { base, gamma } => {
                Ok(EntryLaw::gaussian_divisible(base.build()?, *gamma)?)
            }
            LawConfig::Matched { m3, m4 } => {
                Ok(EntryLaw::build_matching_law(*m3, *m4, DEFAULT_MATCH_DELTA)?)
            }
            LawConfig::MatchedDivisible { m3, m4, gamma } => {
                Ok(matched_divisible_law(*m3, *m4, *gamma)?)
            }
        }
    }

    /// Short stable label used in cell identifiers.
    pub fn label(&self) -> String {
        match self {
            LawConfig::Gaussian => "gaussian".to_string(),
            LawConfig::Bernoulli => "bernoulli".to_string(),
            LawConfig::TwoGaussianMixture { .. } => "two_gaussian".to_string(),
            LawConfig::GaussianDivisible { .. } => "gaussian_divisible".to_string(),
            LawConfig::Matched { .. } => "matched".to_string(),
            LawConfig::MatchedDivisible { .. } => "matched_divisible".to_string(),
        }
    }
}

/// Gaussian-divisible law with prescribed final moments (m₃, m₄).
///
/// Mixing a base law with a share-γ independent Gaussian maps the base
/// moments as m₃ ↦ (1−γ)^{3/2} m₃ and m₄ ↦ 3 + (1−γ)²(m₄ − 3); inverting
/// those relations and matching the base to the preimage lands the mixed law
/// exactly on the targets.
pub fn matched_divisible_law(m3: f64, m4: f64, gamma: f64) -> Result<EntryLaw, ExperimentError> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(ExperimentError::config("law", "gamma must lie in [0, 1)"));
    }
    let shrink = 1.0 - gamma;
    let base_m3 = m3 / shrink.powf(1.5);
    let base_m4 = 3.0 + (m4 - 3.0) / (shrink * shrink);
    let base = EntryLaw::build_matching_law(base_m3, base_m4, DEFAULT_MATCH_DELTA)?;
    Ok(EntryLaw::gaussian_divisible(base, gamma)?)
}

/// Large-deviation statistic families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMode {
    /// |Σ aᵢ Aᵢ|.
    Linear,
    /// |Σ Bᵢᵢ (Aᵢ² − 1)|.
    QuadraticDiag,
    /// |Σ_{i≠j} Bᵢⱼ Aᵢ Aⱼ|.
    QuadraticOffdiag,
}

impl TailMode {
    /// The stretched-exponential tail exponent for entries with
    /// subexponential decay rate α.
    pub fn exponent(&self, alpha: f64) -> f64 {
        match self {
            TailMode::Linear => 2.0 / (2.0 + alpha),
            TailMode::QuadraticDiag => 1.0 / (1.0 + alpha),
            TailMode::QuadraticOffdiag => 0.5 / (1.0 + alpha),
        }
    }
}

/// Complete description of one experiment run.
///
/// `experiment` and `seed` are mandatory; the rest defaults per experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: String,
    /// Master seed; every sample derives a private substream from it.
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileConfig>,
    /// Second profile for two-ensemble comparisons.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile_b: Option<ProfileConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub law: Option<LawConfig>,
    /// Second law for two-ensemble comparisons.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub law_b: Option<LawConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<SymmetryClass>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n_list: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub e_grid: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub eta_grid: Vec<f64>,
    /// Deviation grid for tail experiments.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub d_grid: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Spectral window (lo, hi) for gap statistics.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<TailMode>,
    /// Swap-statistic name (see the registry in the four-moment experiment).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statistic: Option<String>,
    /// Linear-form coefficients for tail experiments; generated if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<f64>>,
    /// Quadratic-form matrix for tail experiments; generated if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix_b: Option<Vec<Vec<f64>>>,
    /// Enable the entry-by-entry telescoping decomposition (swap experiment).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub telescoping: Option<bool>,
    /// Admissibility threshold for the local-law grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub admissibility: Option<f64>,
    /// Gaussian-divisibility share for matched-partner constructions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

impl RunConfig {
    /// A config with only the two mandatory keys set; callers fill in the
    /// rest field by field.
    pub fn minimal(experiment: &str, seed: u64) -> Self {
        RunConfig {
            experiment: experiment.to_string(),
            seed,
            profile: None,
            profile_b: None,
            law: None,
            law_b: None,
            class: None,
            n_list: vec![],
            e_grid: vec![],
            eta_grid: vec![],
            d_grid: vec![],
            k_max: None,
            samples: None,
            window: None,
            mode: None,
            statistic: None,
            coefficients: None,
            matrix_b: None,
            telescoping: None,
            admissibility: None,
            gamma: None,
            out_dir: None,
            threads: None,
        }
    }

    /// Parse from JSON text. Serde errors (missing `seed`, unknown keys,
    /// wrong types) surface as `ConfigInvalid` with serde's message, which
    /// names the field.
    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        let config: RunConfig = serde_json::from_str(text)
            .map_err(|e| ExperimentError::config("config", e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Canonical JSON text (used for the manifest digest when the caller
    /// built the config programmatically).
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization cannot fail")
    }

    /// Cross-field validation; every error names the offending key.
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let known = crate::list_experiments();
        if !known.contains(&self.experiment.as_str()) {
            return Err(ExperimentError::config(
                "experiment",
                format!("unknown experiment `{}`; known: {}", self.experiment, known.join(", ")),
            ));
        }
        for (key, grid) in [("e_grid", &self.e_grid), ("eta_grid", &self.eta_grid),
            ("d_grid", &self.d_grid)]
        {
            if grid.iter().any(|x| !x.is_finite()) {
                return Err(ExperimentError::config(key, "entries must be finite"));
            }
        }
        if self.eta_grid.iter().any(|&eta| eta <= 0.0) {
            return Err(ExperimentError::config("eta_grid", "entries must be positive"));
        }
        if self.d_grid.iter().any(|&d| d < 0.0) {
            return Err(ExperimentError::config("d_grid", "entries must be nonnegative"));
        }
        if let Some(s) = self.samples {
            if s == 0 {
                return Err(ExperimentError::config("samples", "must be at least 1"));
            }
        }
        if self.n_list.iter().any(|&n| n < 2) {
            return Err(ExperimentError::config("n_list", "dimensions must be at least 2"));
        }
        if let Some([lo, hi]) = self.window {
            if !(lo > -2.0 && hi < 2.0 && lo < hi) {
                return Err(ExperimentError::config(
                    "window",
                    format!("need -2 < lo < hi < 2 strictly inside the bulk; got [{lo}, {hi}]"),
                ));
            }
        }
        if let Some(g) = self.gamma {
            if !(0.0..1.0).contains(&g) {
                return Err(ExperimentError::config("gamma", "must lie in [0, 1)"));
            }
        }
        if let Some(a) = self.admissibility {
            if !(a > 0.0) {
                return Err(ExperimentError::config("admissibility", "must be positive"));
            }
        }
        match self.experiment.as_str() {
            "local_law_scan" => {
                if self.e_grid.is_empty() {
                    return Err(ExperimentError::config("e_grid", "required for local_law_scan"));
                }
                if self.eta_grid.is_empty() {
                    return Err(ExperimentError::config("eta_grid", "required for local_law_scan"));
                }
                if self.e_grid.iter().any(|&e| e.abs() >= 2.0) {
                    return Err(ExperimentError::config(
                        "e_grid",
                        "energies must lie strictly inside (-2, 2)",
                    ));
                }
            }
            "ldp_tails" => {
                if self.d_grid.is_empty() {
                    return Err(ExperimentError::config("d_grid", "required for ldp_tails"));
                }
                if self.samples.unwrap_or(0) < 100_000 {
                    return Err(ExperimentError::config(
                        "samples",
                        "ldp_tails needs at least 100000 samples for stable tail estimates",
                    ));
                }
            }
            "trace_moment_bound" => {
                let k = self.k_max.unwrap_or(8);
                if !(2..=10).contains(&k) {
                    return Err(ExperimentError::config("k_max", "must lie in 2..=10"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    // -- defaulted accessors -------------------------------------------------

    pub fn class_or_default(&self) -> SymmetryClass {
        self.class.unwrap_or(SymmetryClass::ComplexHermitian)
    }

    pub fn profile_or_wigner(&self) -> ProfileConfig {
        self.profile.clone().unwrap_or(ProfileConfig::Wigner)
    }

    pub fn law_or_gaussian(&self) -> LawConfig {
        self.law.clone().unwrap_or(LawConfig::Gaussian)
    }

    pub fn n_or(&self, default: usize) -> usize {
        self.n_list.first().copied().unwrap_or(default)
    }

    pub fn samples_or(&self, default: usize) -> usize {
        self.samples.unwrap_or(default)
    }

    pub fn window_or(&self, default: (f64, f64)) -> (f64, f64) {
        self.window.map(|[lo, hi]| (lo, hi)).unwrap_or(default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let config =
            RunConfig::from_json(r#"{"experiment": "trace_moment_bound", "seed": 42}"#).unwrap();
        assert_eq!(config.experiment, "trace_moment_bound");
        assert_eq!(config.seed, 42);
        assert_eq!(config.class_or_default(), SymmetryClass::ComplexHermitian);
        assert_eq!(config.profile_or_wigner(), ProfileConfig::Wigner);
    }

    #[test]
    fn missing_seed_is_reported_by_name() {
        let err = RunConfig::from_json(r#"{"experiment": "trace_moment_bound"}"#).unwrap_err();
        match err {
            ExperimentError::ConfigInvalid { message, .. } => {
                assert!(message.contains("seed"), "message should name the key: {message}")
            }
            other => panic!("wrong error: {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::from_json(
            r#"{"experiment": "trace_moment_bound", "seed": 1, "bogus": 3}"#,
        )
        .unwrap_err();
        match err {
            ExperimentError::ConfigInvalid { message, .. } => {
                assert!(message.contains("bogus"), "{message}")
            }
            other => panic!("wrong error: {other:?}"),
        }
    }

    #[test]
    fn unknown_experiment_is_rejected() {
        let err = RunConfig::from_json(r#"{"experiment": "warp_drive", "seed": 1}"#).unwrap_err();
        match err {
            ExperimentError::ConfigInvalid { key, message } => {
                assert_eq!(key, "experiment");
                assert!(message.contains("warp_drive"));
            }
            other => panic!("wrong error: {other:?}"),
        }
    }

    #[test]
    fn edge_window_is_rejected_by_key() {
        let err = RunConfig::from_json(
            r#"{"experiment": "gap_universality", "seed": 1, "window": [1.9, 2.1]}"#,
        )
        .unwrap_err();
        match err {
            ExperimentError::ConfigInvalid { key, .. } => assert_eq!(key, "window"),
            other => panic!("wrong error: {other:?}"),
        }
    }

    #[test]
    fn ldp_sample_floor_is_enforced() {
        let err = RunConfig::from_json(
            r#"{"experiment": "ldp_tails", "seed": 1, "d_grid": [0.0, 1.0], "samples": 100}"#,
        )
        .unwrap_err();
        match err {
            ExperimentError::ConfigInvalid { key, .. } => assert_eq!(key, "samples"),
            other => panic!("wrong error: {other:?}"),
        }
    }

    #[test]
    fn law_configs_build_the_advertised_laws() {
        let g = LawConfig::Gaussian.build().unwrap();
        assert_eq!(g.exact_moments().3, 3.0);
        let b = LawConfig::Bernoulli.build().unwrap();
        assert_eq!(b.exact_moments().3, 1.0);
        let m = LawConfig::Matched { m3: 0.3, m4: 2.5 }.build().unwrap();
        let (_, _, m3, m4) = m.exact_moments();
        assert!((m3 - 0.3).abs() < 1e-8 && (m4 - 2.5).abs() < 1e-8);
    }

    #[test]
    fn matched_divisible_hits_the_final_moments_exactly() {
        for &(m3, m4, gamma) in
            &[(0.0, 3.0, 0.2), (0.2, 2.8, 0.2), (-0.4, 3.4, 0.1), (0.0, 2.2, 0.3)]
        {
            let law = matched_divisible_law(m3, m4, gamma).unwrap();
            let (_, _, got3, got4) = law.exact_moments();
            assert!((got3 - m3).abs() < 1e-8, "m3: {got3} vs {m3}");
            assert!((got4 - m4).abs() < 1e-8, "m4: {got4} vs {m4}");
        }
    }

    #[test]
    fn profile_configs_build_doubly_stochastic_profiles() {
        for config in [
            ProfileConfig::Wigner,
            ProfileConfig::Band { w: 8.0, shape: BandShape::Uniform },
            ProfileConfig::TwoBlock { low: 0.5, high: 1.5, cross: 1.0 },
            ProfileConfig::TwoBlock { low: 0.5, high: 1.5, cross: 0.25 },
        ] {
            let p = config.build(32).unwrap();
            assert!(p.row_sum_residual() < 1e-12, "{config:?}");
        }
    }

    #[test]
    fn two_block_profile_matches_the_closed_form_sinkhorn_fixed_point() {
        // With equal block sizes, balance forces low·d_l² = high·d_h², so
        // (with r = √(high/low) and k solving k(high + cross·r) = 1)
        //   N·σ²(block) = 2·high·k,   N·σ²(cross) = 2·cross·r·k.
        // For (low, high, cross) = (0.5, 1.5, 0.25): blocks 1.55198…,
        // cross 0.44801…; the default cross = 1 gives the much milder
        // 1.07180… / 0.92820… split.
        let strong =
            ProfileConfig::TwoBlock { low: 0.5, high: 1.5, cross: 0.25 }.build(64).unwrap();
        let r = 3f64.sqrt();
        let k = 1.0 / (1.5 + 0.25 * r);
        assert!((strong.c_sup() - 2.0 * 1.5 * k).abs() < 1e-9, "c_sup {}", strong.c_sup());
        assert!((strong.c_inf() - 2.0 * 0.25 * r * k).abs() < 1e-9, "c_inf {}", strong.c_inf());

        let mild = ProfileConfig::TwoBlock { low: 0.5, high: 1.5, cross: 1.0 }.build(64).unwrap();
        let k_mild = 1.0 / (1.5 + r);
        assert!((mild.c_inf() - 2.0 * 1.5 * k_mild).abs() < 1e-9, "c_inf {}", mild.c_inf());
        assert!((mild.c_sup() - 2.0 * r * k_mild).abs() < 1e-9, "c_sup {}", mild.c_sup());
    }

    #[test]
    fn config_json_round_trips() {
        let config = RunConfig::from_json(
            r#"{
                "experiment": "local_law_scan",
                "seed": 9,
                "profile": {"type": "band", "w": 16.0, "shape": "uniform"},
                "law": {"type": "matched", "m3": 0.1, "m4": 2.9},
                "n_list": [128],
                "e_grid": [0.0],
                "eta_grid": [0.1, 0.2],
                "samples": 4
            }"#,
        )
        .unwrap();
        let back = RunConfig::from_json(&config.to_json()).unwrap();
        assert_eq!(back, config);
    }
}
