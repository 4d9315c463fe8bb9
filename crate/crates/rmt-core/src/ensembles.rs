//! Sampling random matrices from (profile, law) pairs, plus the matrix
//! Ornstein–Uhlenbeck flow.
//!
//! Entries h_ij for i ≤ j are independent with E h_ij = 0 and
//! E|h_ij|² = σ²_ij; the lower triangle mirrors by conjugation exactly.
//! Each entry is generated from its own counter-derived substream, so any
//! entry is reproducible in isolation and sampling order is irrelevant.
//!
//! The flow is the exact closed form H_t = e^{−t/2}·H₀ + √(1−e^{−t})·V
//! with V an independent Gaussian matrix of entry variance 1/N — a
//! memoryless snapshot, no SDE discretization. Flows compose: evolving by
//! t₁ then t₂ is distributed as evolving by t₁+t₂.

use crate::entrylaws::EntryLaw;
use crate::numerics::rng::{derive_rng, DOMAIN_MATRIX_ENTRY, DOMAIN_OU_NOISE};
use crate::profiles::VarianceProfile;
use crate::C64;
use ndarray::Array2;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Errors from matrix sampling and evolution.
#[derive(Debug, Clone, PartialEq)]
pub enum EnsembleError {
    /// Flow time must be nonnegative.
    NegativeTime { t: f64 },
    /// Provenance could not be replayed.
    Reproduce(String),
}

impl fmt::Display for EnsembleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnsembleError::NegativeTime { t } => write!(f, "flow time must be ≥ 0, got {t}"),
            EnsembleError::Reproduce(msg) => write!(f, "could not replay provenance: {msg}"),
        }
    }
}

impl std::error::Error for EnsembleError {}

/// Symmetry class of the ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryClass {
    RealSymmetric,
    ComplexHermitian,
}

/// One application of the Ornstein–Uhlenbeck flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowStep {
    pub t: f64,
    pub seed: u64,
}

/// Everything needed to rebuild a matrix bit-identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// Profile identity as serialized by `VarianceProfile::to_json`.
    pub profile: String,
    /// Entry-law identity as serialized JSON.
    pub law: String,
    pub class: SymmetryClass,
    pub seed: u64,
    /// Flow applications in order; total flow time is the sum of steps.
    pub flow_steps: Vec<FlowStep>,
}

impl Provenance {
    /// Cumulative flow time t ≥ 0.
    pub fn flow_time(&self) -> f64 {
        self.flow_steps.iter().map(|s| s.t).sum()
    }
}

/// A sampled Hermitian (or real symmetric) random matrix. Entries are
/// stored complex for uniformity; the real class has exactly zero
/// imaginary parts. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomMatrix {
    n: usize,
    class: SymmetryClass,
    entries: Array2<C64>,
    provenance: Provenance,
}

/// The per-entry generator for (i, j) with i ≤ j, derived from the master
/// seed by the counter path [DOMAIN_MATRIX_ENTRY, i, j].
pub fn entry_substream(seed: u64, i: usize, j: usize) -> ChaCha8Rng {
    derive_rng(seed, &[DOMAIN_MATRIX_ENTRY, i as u64, j as u64])
}

/// One standardized entry draw: real v = x for the diagonal and the real
/// class, complex v = (x + iy)/√2 off-diagonal in the Hermitian class, so
/// E|v|² = 1 either way.
fn standardized_entry(rng: &mut ChaCha8Rng, law: &EntryLaw, class: SymmetryClass, diagonal: bool) -> C64 {
    match (class, diagonal) {
        (SymmetryClass::ComplexHermitian, false) => {
            let x = law.sample_one(rng);
            let y = law.sample_one(rng);
            C64::new(x, y) / 2.0f64.sqrt()
        }
        _ => C64::new(law.sample_one(rng), 0.0),
    }
}

/// Samples H with independent entries h_ij = σ_ij·v_ij for i ≤ j, v_ij
/// standardized per the law; deterministic in (profile, law, class, seed).
pub fn sample_matrix(
    profile: &VarianceProfile,
    law: &EntryLaw,
    class: SymmetryClass,
    seed: u64,
) -> RandomMatrix {
    let n = profile.n();
    let sigma = profile.sigma();
    let mut entries = Array2::<C64>::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let s = sigma[(i, j)];
            if s == 0.0 {
                continue;
            }
            let mut rng = entry_substream(seed, i, j);
            let v = standardized_entry(&mut rng, law, class, i == j);
            entries[(i, j)] = s * v;
            if i != j {
                entries[(j, i)] = s * v.conj();
            }
        }
    }
    RandomMatrix {
        n,
        class,
        entries,
        provenance: Provenance {
            profile: profile.to_json(),
            law: serde_json::to_string(law).expect("law serialization"),
            class,
            seed,
            flow_steps: Vec::new(),
        },
    }
}

/// One Gaussian flow-noise entry with variance 1/N, from the counter path
/// [DOMAIN_OU_NOISE, i, j].
fn noise_entry(seed: u64, i: usize, j: usize, n: usize, class: SymmetryClass) -> C64 {
    let mut rng = derive_rng(seed, &[DOMAIN_OU_NOISE, i as u64, j as u64]);
    let x: f64 = StandardNormal.sample(&mut rng);
    match (class, i == j) {
        (SymmetryClass::ComplexHermitian, false) => {
            let y: f64 = StandardNormal.sample(&mut rng);
            C64::new(x, y) / (2.0 * n as f64).sqrt()
        }
        _ => C64::new(x / (n as f64).sqrt(), 0.0),
    }
}

/// H_t = e^{−t/2}·H₀ + √(1−e^{−t})·V with fresh Gaussian V of entry
/// variance 1/N; t = 0 returns H₀ unchanged.
pub fn ou_evolve(h0: &RandomMatrix, t: f64, seed: u64) -> Result<RandomMatrix, EnsembleError> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(EnsembleError::NegativeTime { t });
    }
    if t == 0.0 {
        return Ok(h0.clone());
    }
    let n = h0.n;
    let decay = (-t / 2.0).exp();
    let spread = (1.0 - (-t).exp()).sqrt();
    let mut entries = Array2::<C64>::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let v = decay * h0.entries[(i, j)] + spread * noise_entry(seed, i, j, n, h0.class);
            entries[(i, j)] = v;
            if i != j {
                entries[(j, i)] = v.conj();
            }
        }
    }
    let mut provenance = h0.provenance.clone();
    provenance.flow_steps.push(FlowStep { t, seed });
    Ok(RandomMatrix { n, class: h0.class, entries, provenance })
}

impl RandomMatrix {
    /// Wraps an explicitly given Hermitian matrix. The symmetry class is
    /// inferred (all-real imaginary parts ⇒ real symmetric), and provenance
    /// is marked `explicit` — such a matrix cannot be replayed from seeds.
    pub fn from_entries(entries: Array2<C64>) -> RandomMatrix {
        let n = entries.nrows();
        assert_eq!(n, entries.ncols(), "matrix must be square");
        let mut real = true;
        for i in 0..n {
            for j in i..n {
                let d = (entries[(i, j)] - entries[(j, i)].conj()).norm();
                assert!(d <= 1e-12, "entries must be Hermitian: ({i},{j}) differs by {d:e}");
                real &= entries[(i, j)].im == 0.0 && entries[(j, i)].im == 0.0;
            }
        }
        let class = if real { SymmetryClass::RealSymmetric } else { SymmetryClass::ComplexHermitian };
        RandomMatrix {
            n,
            class,
            entries,
            provenance: Provenance {
                profile: "explicit".to_string(),
                law: "explicit".to_string(),
                class,
                seed: 0,
                flow_steps: Vec::new(),
            },
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn class(&self) -> SymmetryClass {
        self.class
    }

    /// The Hermitian entry matrix (complex storage for both classes).
    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    /// Real part view for the real symmetric class.
    pub fn real_entries(&self) -> Array2<f64> {
        self.entries.mapv(|c| c.re)
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Replays provenance from scratch; bit-identical to the original.
    pub fn from_provenance(p: &Provenance) -> Result<RandomMatrix, EnsembleError> {
        let profile = VarianceProfile::from_json(&p.profile)
            .map_err(|e| EnsembleError::Reproduce(e.to_string()))?;
        let law: EntryLaw = serde_json::from_str(&p.law)
            .map_err(|e| EnsembleError::Reproduce(e.to_string()))?;
        let mut h = sample_matrix(&profile, &law, p.class, p.seed);
        for step in &p.flow_steps {
            h = ou_evolve(&h, step.t, step.seed)?;
        }
        Ok(h)
    }

    /// CSV export, row-major, 17 significant digits; the Hermitian class
    /// interleaves re/im columns.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n {
            let mut cells = Vec::with_capacity(self.n * 2);
            for j in 0..self.n {
                let e = self.entries[(i, j)];
                match self.class {
                    SymmetryClass::RealSymmetric => cells.push(format!("{:.16e}", e.re)),
                    SymmetryClass::ComplexHermitian => {
                        cells.push(format!("{:.16e}", e.re));
                        cells.push(format!("{:.16e}", e.im));
                    }
                }
            }
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
