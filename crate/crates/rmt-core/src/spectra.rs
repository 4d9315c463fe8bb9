//! Eigen-statistics on sampled matrices: counting functions against the
//! semicircle law, rigidity against classical locations, eigenvector
//! delocalization, smoothed correlation estimators, unfolded gap
//! statistics, and the sine-kernel reference curve.

use std::fmt;

use ndarray::Array2;
use rand::Rng;

use crate::ensembles::{Provenance, RandomMatrix, SymmetryClass};
use crate::linalg::{hermitian_eigh, symmetric_eigh, LinalgError};
use crate::numerics::rng::{derive_rng, DOMAIN_AUX};
use crate::semicircle::{classical_locations, n_sc, rho_sc};
use crate::C64;

/// Per-column eigen-equation budget relative to ‖H‖.
const RESIDUAL_TOLERANCE: f64 = 1e-10;
/// Orthonormality budget for the eigenvector matrix.
const ORTHONORMALITY_TOLERANCE: f64 = 1e-10;
/// Uniform grid size for the trapezoid L¹ distance over [−3, 3].
const L1_GRID_POINTS: usize = 1201;
/// Largest N for which the three-point sum is evaluated exhaustively.
const DIRECT_TRIPLE_LIMIT: usize = 256;
/// Sampled distinct triples above the exhaustive limit.
const SAMPLED_TRIPLES: usize = 1_000_000;
/// Counter tag for the triple-sampling stream.
const TRIPLE_SAMPLE_TAG: u64 = 0x5452_4950_4c45;

/// Errors from spectral statistics.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectraError {
    /// No eigenvalue (or gap) falls inside the requested window.
    EmptyWindow,
    /// Underlying eigendecomposition failure.
    Linalg(String),
    /// Construction from parts violated a structural invariant.
    InvalidData(String),
}

impl fmt::Display for SpectraError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectraError::EmptyWindow => write!(f, "no spectrum in the requested window"),
            SpectraError::Linalg(msg) => write!(f, "eigendecomposition failed: {msg}"),
            SpectraError::InvalidData(msg) => write!(f, "invalid spectral data: {msg}"),
        }
    }
}

impl std::error::Error for SpectraError {}

impl From<LinalgError> for SpectraError {
    fn from(e: LinalgError) -> Self {
        SpectraError::Linalg(e.to_string())
    }
}

/// A full eigendecomposition λ_1 ≤ … ≤ λ_N with unitary column
/// eigenvectors, validated at construction and linked to the provenance of
/// the matrix it came from.
#[derive(Debug, Clone)]
pub struct SpectralData {
    eigenvalues: Vec<f64>,
    vectors: Array2<C64>,
    provenance: Provenance,
}

fn check_orthonormal(vectors: &Array2<C64>) -> Result<(), SpectraError> {
    let gram = vectors.mapv(|c| c.conj()).t().dot(vectors);
    let n = vectors.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            worst = worst.max((gram[(i, j)] - target).norm());
        }
    }
    if worst > ORTHONORMALITY_TOLERANCE {
        return Err(SpectraError::InvalidData(format!(
            "eigenvector columns deviate from orthonormality by {worst:e}"
        )));
    }
    Ok(())
}

impl SpectralData {
    /// Diagonalizes a sampled matrix and verifies the eigen-equation and
    /// orthonormality budgets.
    pub fn from_matrix(h: &RandomMatrix) -> Result<SpectralData, SpectraError> {
        let (vals, vectors) = match h.class() {
            SymmetryClass::RealSymmetric => {
                let (vals, vecs) = symmetric_eigh(&h.real_entries())?;
                (vals, vecs.mapv(|x| C64::new(x, 0.0)))
            }
            SymmetryClass::ComplexHermitian => hermitian_eigh(h.entries())?,
        };
        let eigenvalues = vals.to_vec();
        assert!(
            eigenvalues.windows(2).all(|w| w[0] <= w[1]),
            "eigenvalues must come back sorted"
        );
        // ‖Hu_α − λ_α u_α‖ per column, one product for all columns.
        let norm = eigenvalues.iter().fold(0.0_f64, |a, &l| a.max(l.abs()));
        let mut residual_matrix = h.entries().dot(&vectors);
        for (alpha, &lambda) in eigenvalues.iter().enumerate() {
            let mut column = residual_matrix.column_mut(alpha);
            column.zip_mut_with(&vectors.column(alpha), |r, &u| *r -= lambda * u);
        }
        for alpha in 0..eigenvalues.len() {
            let res = residual_matrix
                .column(alpha)
                .iter()
                .map(|c| c.norm_sqr())
                .sum::<f64>()
                .sqrt();
            if res > RESIDUAL_TOLERANCE * norm {
                return Err(SpectraError::InvalidData(format!(
                    "eigen-equation residual {res:e} in column {alpha}"
                )));
            }
        }
        check_orthonormal(&vectors)?;
        Ok(SpectralData { eigenvalues, vectors, provenance: h.provenance().clone() })
    }

    /// Assembles spectral data from explicit parts (synthetic spectra,
    /// references); validates sortedness, shape, and orthonormality.
    pub fn from_eigenpairs(
        eigenvalues: Vec<f64>,
        vectors: Array2<C64>,
        provenance: Provenance,
    ) -> Result<SpectralData, SpectraError> {
        let n = eigenvalues.len();
        if vectors.nrows() != n || vectors.ncols() != n {
            return Err(SpectraError::InvalidData(format!(
                "vector matrix is {}×{} for {n} eigenvalues",
                vectors.nrows(),
                vectors.ncols()
            )));
        }
        if !eigenvalues.windows(2).all(|w| w[0] <= w[1]) {
            return Err(SpectraError::InvalidData("eigenvalues not sorted".into()));
        }
        check_orthonormal(&vectors)?;
        Ok(SpectralData { eigenvalues, vectors, provenance })
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Unitary eigenvector matrix; column α belongs to λ_α.
    pub fn vectors(&self) -> &Array2<C64> {
        &self.vectors
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }
}

/// One grid point of the counting comparison.
#[derive(Debug, Clone, Copy)]
pub struct CountingRecord {
    pub e: f64,
    /// Empirical CDF N⁻¹#{λ_j ≤ E}.
    pub n_emp: f64,
    /// n_emp(E) − n_sc(E).
    pub deviation: f64,
}

/// Counting-function comparison against the semicircle CDF.
#[derive(Debug, Clone)]
pub struct CountingStats {
    pub records: Vec<CountingRecord>,
    /// Trapezoid approximation of ∫_{−3}^{3} |n_emp − n_sc| dE.
    pub l1_distance: f64,
    /// Exact sup distance, evaluated at the jump points.
    pub sup_distance: f64,
}

/// N⁻¹#{λ_j ≤ E} for a sorted spectrum.
pub fn empirical_cdf(sorted: &[f64], e: f64) -> f64 {
    sorted.partition_point(|&x| x <= e) as f64 / sorted.len() as f64
}

/// Counting statistics from raw sorted eigenvalues (fast path for
/// Monte-Carlo loops that never touch eigenvectors).
pub fn counting_stats_of(sorted: &[f64], grid: &[f64]) -> CountingStats {
    assert!(grid.windows(2).all(|w| w[0] <= w[1]), "grid must be sorted");
    assert!(!sorted.is_empty(), "empty spectrum");
    let records = grid
        .iter()
        .map(|&e| {
            let n_emp = empirical_cdf(sorted, e);
            CountingRecord { e, n_emp, deviation: n_emp - n_sc(e) }
        })
        .collect();

    let mut l1 = 0.0;
    let step = 6.0 / (L1_GRID_POINTS - 1) as f64;
    let mut previous = (empirical_cdf(sorted, -3.0) - n_sc(-3.0)).abs();
    for k in 1..L1_GRID_POINTS {
        let e = -3.0 + k as f64 * step;
        let current = (empirical_cdf(sorted, e) - n_sc(e)).abs();
        l1 += 0.5 * (previous + current) * step;
        previous = current;
    }

    // The sup over E of |n_emp − n_sc| is attained at an eigenvalue, just
    // before or after the jump.
    let n = sorted.len() as f64;
    let mut sup = 0.0_f64;
    for (i, &lambda) in sorted.iter().enumerate() {
        let target = n_sc(lambda);
        sup = sup.max((target - i as f64 / n).abs());
        sup = sup.max(((i + 1) as f64 / n - target).abs());
    }
    CountingStats { records, l1_distance: l1, sup_distance: sup }
}

/// Counting statistics for a spectrum with eigenvectors attached.
pub fn counting_stats(s: &SpectralData, grid: &[f64]) -> CountingStats {
    counting_stats_of(s.eigenvalues(), grid)
}

/// Mean squared deviation from classical locations,
/// N⁻¹ Σ_j (λ_j − γ_j)².
pub fn rigidity_of(sorted: &[f64]) -> f64 {
    let gamma = classical_locations(sorted.len());
    sorted
        .iter()
        .zip(&gamma)
        .map(|(&l, &g)| (l - g) * (l - g))
        .sum::<f64>()
        / sorted.len() as f64
}

/// Rigidity statistic of a spectrum with eigenvectors attached.
pub fn rigidity_stat(s: &SpectralData) -> f64 {
    rigidity_of(s.eigenvalues())
}

/// Sup-norm summary of the eigenvectors in an energy window.
#[derive(Debug, Clone, Copy)]
pub struct DelocalizationStat {
    /// max over window modes of ‖u_α‖∞.
    pub max_sup_norm: f64,
    /// max over window modes of ‖u_α‖∞ · √N · (||λ_α| − 2| + 1/N)^{1/2},
    /// the edge-weighted variant.
    pub max_edge_weighted: f64,
    /// Number of modes in the window.
    pub modes: usize,
}

/// Delocalization statistics over eigenvectors with λ_α ∈ [lo, hi].
pub fn delocalization_stat(
    s: &SpectralData,
    window: (f64, f64),
) -> Result<DelocalizationStat, SpectraError> {
    let (lo, hi) = window;
    assert!((-2.0..=2.0).contains(&lo) && (-2.0..=2.0).contains(&hi) && lo <= hi,
        "window must sit inside [-2, 2]");
    let n = s.n() as f64;
    let mut max_sup = 0.0_f64;
    let mut max_edge = 0.0_f64;
    let mut modes = 0usize;
    for (alpha, &lambda) in s.eigenvalues.iter().enumerate() {
        if lambda < lo || lambda > hi {
            continue;
        }
        modes += 1;
        let sup = s
            .vectors
            .column(alpha)
            .iter()
            .map(|c| c.norm())
            .fold(0.0_f64, f64::max);
        max_sup = max_sup.max(sup);
        let edge_scale = ((lambda.abs() - 2.0).abs() + 1.0 / n).sqrt();
        max_edge = max_edge.max(sup * n.sqrt() * edge_scale);
    }
    if modes == 0 {
        return Err(SpectraError::EmptyWindow);
    }
    Ok(DelocalizationStat { max_sup_norm: max_sup, max_edge_weighted: max_edge, modes })
}

/// The approximate delta function (times π): θ_η(x) = η/(x² + η²).
pub fn theta_eta(x: f64, eta: f64) -> f64 {
    eta / (x * x + eta * eta)
}

/// Smoothed k-point correlation estimator at energies E_j = e + α_j/N:
/// the average of θ_η(λ_{i_1} − E_1)⋯θ_η(λ_{i_k} − E_k) over ordered
/// distinct index tuples.
///
/// Exhaustive for k ≤ 2 and for k = 3 up to N = 256; beyond that the
/// three-point sum is estimated from 10⁶ seeded random distinct triples
/// (deterministic given the provenance seed).
pub fn smoothed_correlation(s: &SpectralData, e: f64, alphas: &[f64], eta: f64) -> f64 {
    let k = alphas.len();
    assert!((1..=3).contains(&k), "k must be 1, 2, or 3");
    assert!(eta > 0.0, "η must be positive");
    let n = s.n();
    let nf = n as f64;
    // θ tables per energy: theta[m][i] = θ_η(λ_i − E_m).
    let theta: Vec<Vec<f64>> = alphas
        .iter()
        .map(|&a| {
            let energy = e + a / nf;
            s.eigenvalues.iter().map(|&l| theta_eta(l - energy, eta)).collect()
        })
        .collect();
    match k {
        1 => theta[0].iter().sum::<f64>() / nf,
        2 => {
            assert!(n >= 2, "two-point estimator needs N ≥ 2");
            let mut sum = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        sum += theta[0][i] * theta[1][j];
                    }
                }
            }
            sum / (nf * (nf - 1.0))
        }
        _ => {
            assert!(n >= 3, "three-point estimator needs N ≥ 3");
            if n <= DIRECT_TRIPLE_LIMIT {
                let mut sum = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        if j == i {
                            continue;
                        }
                        let tij = theta[0][i] * theta[1][j];
                        for l in 0..n {
                            if l != i && l != j {
                                sum += tij * theta[2][l];
                            }
                        }
                    }
                }
                sum / (nf * (nf - 1.0) * (nf - 2.0))
            } else {
                let mut rng =
                    derive_rng(s.provenance.seed, &[DOMAIN_AUX, TRIPLE_SAMPLE_TAG]);
                let mut sum = 0.0;
                for _ in 0..SAMPLED_TRIPLES {
                    let i = rng.random_range(0..n);
                    let j = loop {
                        let j = rng.random_range(0..n);
                        if j != i {
                            break j;
                        }
                    };
                    let l = loop {
                        let l = rng.random_range(0..n);
                        if l != i && l != j {
                            break l;
                        }
                    };
                    sum += theta[0][i] * theta[1][j] * theta[2][l];
                }
                sum / SAMPLED_TRIPLES as f64
            }
        }
    }
}

/// Unfolded consecutive gaps g_j = N·ρ_sc(λ_j)·(λ_{j+1} − λ_j) for pairs
/// with both eigenvalues in the window; the density is taken at the left
/// gap endpoint.
pub fn gap_statistics(s: &SpectralData, window: (f64, f64)) -> Result<Vec<f64>, SpectraError> {
    gap_statistics_of(s.eigenvalues(), window)
}

/// Gap statistics from raw sorted eigenvalues.
pub fn gap_statistics_of(sorted: &[f64], window: (f64, f64)) -> Result<Vec<f64>, SpectraError> {
    let (lo, hi) = window;
    assert!(lo > -2.0 && hi < 2.0 && lo < hi, "window must sit strictly inside (-2, 2)");
    let n = sorted.len() as f64;
    let gaps: Vec<f64> = sorted
        .windows(2)
        .filter(|w| w[0] >= lo && w[1] <= hi)
        .map(|w| n * rho_sc(w[0]) * (w[1] - w[0]))
        .collect();
    if gaps.is_empty() {
        return Err(SpectraError::EmptyWindow);
    }
    Ok(gaps)
}

/// sin(πx)/(πx) with the removable singularity at 0.
pub fn sine_kernel(x: f64) -> f64 {
    let t = std::f64::consts::PI * x;
    if t.abs() < 1e-8 {
        1.0 - t * t / 6.0
    } else {
        t.sin() / t
    }
}

/// Moving averages λ_{j,K} = K⁻¹ Σ_{i=0}^{K−1} λ_{j+i} over all
/// length-K windows of the sorted spectrum.
pub fn moving_average_of(sorted: &[f64], k: usize) -> Vec<f64> {
    assert!(k >= 1 && k <= sorted.len(), "window length out of range");
    sorted
        .windows(k)
        .map(|w| w.iter().sum::<f64>() / k as f64)
        .collect()
}

/// Moving averages for a spectrum with eigenvectors attached.
pub fn moving_average(s: &SpectralData, k: usize) -> Vec<f64> {
    moving_average_of(s.eigenvalues(), k)
}

/// Single-column CSV of gap samples.
pub fn gaps_csv(gaps: &[f64]) -> String {
    let mut out = String::from("gap\n");
    for g in gaps {
        out.push_str(&format!("{g:.16e}\n"));
    }
    out
}

/// Header for correlation-scan CSV rows with k offsets.
pub fn correlation_csv_header(k: usize) -> String {
    assert!((1..=3).contains(&k));
    let mut out = String::from("e");
    for m in 1..=k {
        out.push_str(&format!(",alpha{m}"));
    }
    out.push_str(",eta,value");
    out
}

/// One correlation-scan CSV row matching `correlation_csv_header`.
pub fn correlation_csv_row(e: f64, alphas: &[f64], eta: f64, value: f64) -> String {
    let mut out = format!("{e:.16e}");
    for a in alphas {
        out.push_str(&format!(",{a:.16e}"));
    }
    out.push_str(&format!(",{eta:.16e},{value:.16e}"));
    out
}
