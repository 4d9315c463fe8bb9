//! Variance profiles σ²_ij and their spectral-gap analysis.
//!
//! A profile stores the doubly stochastic matrix B = (σ²_ij) together with
//! the derived parameters:
//!
//! - M = 1/max σ²_ij;
//! - C_inf = N·min σ²_ij and C_sup = N·max σ²_ij (C_inf = 0 for profiles
//!   with structural zeros, e.g. narrow bands);
//! - δ₋ = 1 + min Spec(B) and δ₊ = 1 − (second-largest eigenvalue), so
//!   Spec(B) ⊂ [−1+δ₋, 1−δ₊] ∪ {1} with 1 simple.
//!
//! Constructors: `wigner_profile` (flat 1/N), `generalized_profile`
//! (symmetric Sinkhorn scaling of positive weights), and `band_profile`
//! (periodic band σ²_ij ∝ W⁻¹·f([i−j]_N/W), renormalized exactly). Band
//! spectra are cross-checked against the DFT of the circulant's first row.

use crate::linalg::{symmetric_eigvals, LinalgError};
use ndarray::Array2;
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Convergence tolerance for doubly stochastic row sums.
const ROW_SUM_TOL: f64 = 1e-13;
/// Iteration cap for the Sinkhorn scaling.
const SINKHORN_MAX_ITERS: usize = 10_000;
/// Multiplicity tolerance for "1 is a simple eigenvalue".
const SIMPLE_TOP_TOL: f64 = 1e-9;
/// Agreement tolerance between dense and DFT band spectra.
const DFT_CROSS_CHECK_TOL: f64 = 1e-9;

/// Errors from profile construction and analysis.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileError {
    /// Weights must be strictly positive and symmetric.
    InvalidWeights { i: usize, j: usize, value: f64 },
    /// Sinkhorn scaling failed to reach doubly stochastic form.
    SinkhornDivergence { iterations: usize, residual: f64 },
    /// The band shape's support wraps around the torus for this (N, W).
    SupportTooWide { n: usize, w: f64, support_radius: f64 },
    /// A parameter is outside its admissible range.
    BadParameter { name: &'static str, value: f64 },
    /// A serialized profile could not be parsed.
    Parse(String),
    /// Dense eigendecomposition failed, or the circulant cross-check
    /// disagreed with it.
    EigFailure(String),
}

impl fmt::Display for ProfileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileError::InvalidWeights { i, j, value } => {
                write!(f, "weights must be symmetric and strictly positive; entry ({i},{j}) = {value}")
            }
            ProfileError::SinkhornDivergence { iterations, residual } => write!(
                f,
                "Sinkhorn scaling did not converge after {iterations} iterations (row-sum residual {residual:.3e})"
            ),
            ProfileError::SupportTooWide { n, w, support_radius } => write!(
                f,
                "band shape with support radius {support_radius} wraps around for N = {n}, W = {w}"
            ),
            ProfileError::BadParameter { name, value } => {
                write!(f, "invalid parameter {name} = {value}")
            }
            ProfileError::Parse(msg) => write!(f, "could not parse profile: {msg}"),
            ProfileError::EigFailure(msg) => write!(f, "spectral analysis failed: {msg}"),
        }
    }
}

impl std::error::Error for ProfileError {}

impl From<LinalgError> for ProfileError {
    fn from(e: LinalgError) -> Self {
        ProfileError::EigFailure(e.to_string())
    }
}

/// Band shape functions: nonnegative, symmetric, ∫f = 1, supported on
/// [−1/2, 1/2] (endpoints included), defined in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandShape {
    /// f(x) = 1 on [−1/2, 1/2].
    Uniform,
    /// f(x) = 2(1 − 2|x|) on [−1/2, 1/2].
    Triangular,
    /// A Gaussian with standard deviation 1/6 truncated to [−1/2, 1/2] and
    /// renormalized in closed form via the error function.
    TruncatedGaussian,
}

impl BandShape {
    /// Half-width of the support; 1/2 for every registered shape.
    pub fn support_radius(&self) -> f64 {
        0.5
    }

    /// Shape value f(x).
    pub fn evaluate(&self, x: f64) -> f64 {
        let ax = x.abs();
        if ax > 0.5 {
            return 0.0;
        }
        match self {
            BandShape::Uniform => 1.0,
            BandShape::Triangular => 2.0 * (1.0 - 2.0 * ax),
            BandShape::TruncatedGaussian => {
                let s = 1.0 / 6.0;
                let mass = s
                    * (2.0 * std::f64::consts::PI).sqrt()
                    * statrs::function::erf::erf(0.5 / (s * 2.0f64.sqrt()));
                (-x * x / (2.0 * s * s)).exp() / mass
            }
        }
    }

    /// Supremum norm ‖f‖_∞.
    pub fn sup_norm(&self) -> f64 {
        self.evaluate(0.0)
    }
}

/// How a profile was built; the serialized identity of the profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "params", rename_all = "snake_case")]
pub enum ProfileSpec {
    Wigner,
    Generalized { weights: Vec<Vec<f64>> },
    Band { w: f64, shape: BandShape },
}

/// A variance profile: the doubly stochastic σ² matrix plus derived
/// parameters. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceProfile {
    n: usize,
    sigma2: Array2<f64>,
    m_param: f64,
    c_inf: f64,
    c_sup: f64,
    delta_minus: f64,
    delta_plus: f64,
    simple_top: bool,
    /// Pre-normalization M ≤ W/‖f‖_∞ for band profiles.
    pre_normalization_m: Option<f64>,
    spec: ProfileSpec,
}

/// Flat profile σ²_ij = 1/N: the standard Wigner ensemble. B is the
/// rank-one projection onto the constant vector, so Spec(B) = {1, 0, …, 0}
/// exactly and δ₋ = δ₊ = 1.
pub fn wigner_profile(n: usize) -> VarianceProfile {
    assert!(n >= 1, "dimension must be positive");
    let sigma2 = Array2::from_elem((n, n), 1.0 / n as f64);
    VarianceProfile {
        n,
        sigma2,
        m_param: n as f64,
        c_inf: 1.0,
        c_sup: 1.0,
        delta_minus: 1.0,
        delta_plus: 1.0,
        simple_top: true,
        pre_normalization_m: None,
        spec: ProfileSpec::Wigner,
    }
}

/// Symmetric Sinkhorn scaling of strictly positive weights to a doubly
/// stochastic profile: finds x > 0 with x_i·(Wx)_i = 1 and sets
/// σ²_ij = x_i·w_ij·x_j (mirrored across the diagonal, so symmetry is
/// bit-exact).
pub fn generalized_profile(weights: &Array2<f64>) -> Result<VarianceProfile, ProfileError> {
    let n = weights.nrows();
    if n == 0 || weights.ncols() != n {
        return Err(ProfileError::BadParameter { name: "weights dimension", value: n as f64 });
    }
    for i in 0..n {
        for j in 0..n {
            let v = weights[(i, j)];
            if !(v > 0.0) || !v.is_finite() {
                return Err(ProfileError::InvalidWeights { i, j, value: v });
            }
            if weights[(i, j)] != weights[(j, i)] {
                return Err(ProfileError::InvalidWeights { i, j, value: v });
            }
        }
    }

    // Damped fixed-point iteration x ← √(x / Wx), the symmetric
    // Sinkhorn–Knopp step; the square root prevents two-cycling.
    let mut x = vec![1.0f64; n];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    for it in 0..SINKHORN_MAX_ITERS {
        iterations = it + 1;
        let mut wx = vec![0.0f64; n];
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += weights[(i, j)] * x[j];
            }
            wx[i] = acc;
        }
        residual = 0.0f64;
        for i in 0..n {
            residual = residual.max((x[i] * wx[i] - 1.0).abs());
        }
        if residual <= ROW_SUM_TOL {
            break;
        }
        for i in 0..n {
            x[i] = (x[i] / wx[i]).sqrt();
        }
    }
    if residual > ROW_SUM_TOL {
        return Err(ProfileError::SinkhornDivergence { iterations, residual });
    }

    let mut sigma2 = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let v = x[i] * weights[(i, j)] * x[j];
            sigma2[(i, j)] = v;
            sigma2[(j, i)] = v;
        }
    }
    let spec = ProfileSpec::Generalized {
        weights: (0..n).map(|i| (0..n).map(|j| weights[(i, j)]).collect()).collect(),
    };
    finish_profile(sigma2, None, spec)
}

/// Periodic band profile: raw entries W⁻¹·f([i−j]_N/W) with the signed
/// periodic distance [i−j]_N ∈ (−N/2, N/2], then exact renormalization of
/// the common circulant row sum.
pub fn band_profile(n: usize, w: f64, shape: BandShape) -> Result<VarianceProfile, ProfileError> {
    if n == 0 {
        return Err(ProfileError::BadParameter { name: "n", value: 0.0 });
    }
    if !(w > 0.0) || !w.is_finite() {
        return Err(ProfileError::BadParameter { name: "w", value: w });
    }
    // Support wraps unless radius·W ≤ N/2.
    let radius = shape.support_radius();
    if radius * w > n as f64 / 2.0 + 1e-12 {
        return Err(ProfileError::SupportTooWide { n, w, support_radius: radius });
    }

    // f is symmetric, so the entry depends only on |[i−j]_N|, i.e. the
    // circular distance; computing per distance keeps symmetry bit-exact.
    let max_dist = n / 2;
    let vals: Vec<f64> = (0..=max_dist).map(|d| shape.evaluate(d as f64 / w) / w).collect();
    let mut row_sum = 0.0;
    for i in 0..n {
        let d = i.min(n - i);
        row_sum += vals[d];
    }
    if !(row_sum > 0.0) {
        return Err(ProfileError::BadParameter { name: "row sum", value: row_sum });
    }
    let pre_normalization_m = 1.0 / vals.iter().cloned().fold(0.0f64, f64::max);

    let mut sigma2 = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let diff = if i >= j { i - j } else { j - i };
            let d = diff.min(n - diff);
            sigma2[(i, j)] = vals[d] / row_sum;
        }
    }
    finish_profile(sigma2, Some(pre_normalization_m), ProfileSpec::Band { w, shape })
}

/// Computes the spectral-gap parameters and assembles the profile.
fn finish_profile(
    sigma2: Array2<f64>,
    pre_normalization_m: Option<f64>,
    spec: ProfileSpec,
) -> Result<VarianceProfile, ProfileError> {
    let n = sigma2.nrows();
    let mut min_v = f64::INFINITY;
    let mut max_v = f64::NEG_INFINITY;
    for &v in sigma2.iter() {
        min_v = min_v.min(v);
        max_v = max_v.max(v);
    }
    let eigs = symmetric_eigvals(&sigma2)?;
    if let ProfileSpec::Band { .. } = spec {
        // Circulant cross-check: the DFT of the first row gives the exact
        // spectrum; dense LAPACK must agree entrywise.
        let mut dft = circulant_spectrum(&sigma2);
        dft.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in eigs.iter().zip(dft.iter()) {
            if (a - b).abs() > DFT_CROSS_CHECK_TOL {
                return Err(ProfileError::EigFailure(format!(
                    "dense eigenvalue {a} disagrees with circulant DFT value {b}"
                )));
            }
        }
    }
    let delta_minus = 1.0 + eigs[0];
    let (delta_plus, simple_top) = if n == 1 {
        (1.0, true)
    } else {
        let second = eigs[n - 2];
        ((1.0 - second), (eigs[n - 1] - 1.0).abs() <= SIMPLE_TOP_TOL && second < 1.0 - SIMPLE_TOP_TOL)
    };
    Ok(VarianceProfile {
        n,
        m_param: 1.0 / max_v,
        c_inf: n as f64 * min_v,
        c_sup: n as f64 * max_v,
        delta_minus,
        delta_plus,
        simple_top,
        pre_normalization_m,
        spec,
        sigma2,
    })
}

/// Eigenvalues of a symmetric circulant matrix via the DFT of its first
/// row; the imaginary parts cancel by symmetry.
fn circulant_spectrum(sigma2: &Array2<f64>) -> Vec<f64> {
    let n = sigma2.nrows();
    let mut buf: Vec<Complex<f64>> =
        (0..n).map(|j| Complex::new(sigma2[(0, j)], 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf.into_iter().map(|c| c.re).collect()
}

impl VarianceProfile {
    pub fn n(&self) -> usize {
        self.n
    }

    /// The doubly stochastic matrix B = (σ²_ij).
    pub fn sigma2(&self) -> &Array2<f64> {
        &self.sigma2
    }

    /// Entry standard deviations σ_ij = √(σ²_ij).
    pub fn sigma(&self) -> Array2<f64> {
        self.sigma2.mapv(f64::sqrt)
    }

    /// M = 1/max σ²_ij.
    pub fn m_param(&self) -> f64 {
        self.m_param
    }

    /// C_inf = N·min σ²_ij.
    pub fn c_inf(&self) -> f64 {
        self.c_inf
    }

    /// C_sup = N·max σ²_ij.
    pub fn c_sup(&self) -> f64 {
        self.c_sup
    }

    /// Pre-normalization M for band profiles (satisfies M ≤ W/‖f‖_∞).
    pub fn pre_normalization_m(&self) -> Option<f64> {
        self.pre_normalization_m
    }

    pub fn profile_spec(&self) -> &ProfileSpec {
        &self.spec
    }

    /// (δ₋, δ₊, top eigenvalue simple), cached from the construction-time
    /// eigendecomposition, so the call cannot fail after construction.
    pub fn spectral_gap(&self) -> (f64, f64, bool) {
        (self.delta_minus, self.delta_plus, self.simple_top)
    }

    pub fn delta_minus(&self) -> f64 {
        self.delta_minus
    }

    pub fn delta_plus(&self) -> f64 {
        self.delta_plus
    }

    /// Largest row-sum deviation from 1 — the doubly stochastic residual.
    pub fn row_sum_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            let s: f64 = (0..self.n).map(|j| self.sigma2[(i, j)]).sum();
            worst = worst.max((s - 1.0).abs());
        }
        worst
    }

    /// Serialized identity {type, n, params}; the dense matrix is rebuilt
    /// deterministically on load.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Wire<'a> {
            #[serde(flatten)]
            spec: &'a ProfileSpec,
            n: usize,
        }
        serde_json::to_string(&Wire { spec: &self.spec, n: self.n })
            .expect("profile serialization")
    }

    /// Rebuilds a profile from `to_json` output.
    pub fn from_json(json: &str) -> Result<Self, ProfileError> {
        #[derive(Deserialize)]
        struct Wire {
            #[serde(flatten)]
            spec: ProfileSpec,
            n: usize,
        }
        let wire: Wire =
            serde_json::from_str(json).map_err(|e| ProfileError::Parse(e.to_string()))?;
        match wire.spec {
            ProfileSpec::Wigner => Ok(wigner_profile(wire.n)),
            ProfileSpec::Generalized { weights } => {
                let n = wire.n;
                let flat: Vec<f64> = weights.into_iter().flatten().collect();
                let arr = Array2::from_shape_vec((n, n), flat)
                    .map_err(|_| ProfileError::BadParameter { name: "weights shape", value: n as f64 })?;
                generalized_profile(&arr)
            }
            ProfileSpec::Band { w, shape } => band_profile(wire.n, w, shape),
        }
    }

    /// Dense σ² as CSV, row-major, 17 significant digits.
    pub fn sigma2_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n {
            let row: Vec<String> =
                (0..self.n).map(|j| format!("{:.16e}", self.sigma2[(i, j)])).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rng::derive_rng;
    use rand::Rng;

    #[test]
    fn wigner_profile_constants() {
        let p = wigner_profile(4);
        for v in p.sigma2().iter() {
            assert_eq!(*v, 0.25);
        }
        assert_eq!(p.row_sum_residual(), 0.0);
        assert_eq!(p.c_inf(), 1.0);
        assert_eq!(p.c_sup(), 1.0);
        assert_eq!(p.m_param(), 4.0);
        assert_eq!(p.spectral_gap(), (1.0, 1.0, true));
        let scalar = wigner_profile(1);
        assert_eq!(scalar.sigma2()[(0, 0)], 1.0);
        assert_eq!(scalar.m_param(), 1.0);
    }

    #[test]
    fn generalized_profile_two_by_two_closed_form() {
        // Weights [[1,2],[2,1]]: the symmetric scaling is x = 1/√3·(1,1),
        // giving σ² = [[1/3, 2/3], [2/3, 1/3]].
        let w = ndarray::array![[1.0, 2.0], [2.0, 1.0]];
        let p = generalized_profile(&w).unwrap();
        assert!((p.sigma2()[(0, 0)] - 1.0 / 3.0).abs() < 1e-12);
        assert!((p.sigma2()[(0, 1)] - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(p.sigma2()[(0, 1)], p.sigma2()[(1, 0)]);
        assert_eq!(p.sigma2()[(0, 0)], p.sigma2()[(1, 1)]);
        assert!(p.row_sum_residual() < 1e-12);
    }

    #[test]
    fn generalized_profile_flat_weights_recover_wigner() {
        let w = Array2::from_elem((5, 5), 7.0);
        let p = generalized_profile(&w).unwrap();
        for v in p.sigma2().iter() {
            assert!((v - 0.2).abs() < 1e-13);
        }
        assert!((p.c_inf() - 1.0).abs() < 1e-11);
        assert!((p.c_sup() - 1.0).abs() < 1e-11);
    }

    #[test]
    fn generalized_profile_rejects_bad_weights() {
        let zero = ndarray::array![[1.0, 0.0], [0.0, 1.0]];
        assert!(matches!(
            generalized_profile(&zero),
            Err(ProfileError::InvalidWeights { .. })
        ));
        let asym = ndarray::array![[1.0, 2.0], [3.0, 1.0]];
        assert!(matches!(
            generalized_profile(&asym),
            Err(ProfileError::InvalidWeights { .. })
        ));
    }

    #[test]
    fn generalized_profile_random_weights_properties() {
        // Doubly stochastic within 1e−12; 0 < C_inf ≤ C_sup; δ± ≥ C_inf.
        let mut rng = derive_rng(23, &[1]);
        for trial in 0..5 {
            let n = 3 + 4 * trial;
            let mut w = Array2::<f64>::zeros((n, n));
            for i in 0..n {
                for j in i..n {
                    let v = 0.2 + rng.random::<f64>();
                    w[(i, j)] = v;
                    w[(j, i)] = v;
                }
            }
            let p = generalized_profile(&w).unwrap();
            assert!(p.row_sum_residual() < 1e-12);
            assert!(p.c_inf() > 0.0);
            assert!(p.c_inf() <= p.c_sup());
            let (dm, dp, simple) = p.spectral_gap();
            assert!(simple);
            assert!(dm >= p.c_inf() - 1e-10, "δ₋ = {dm} < C_inf = {}", p.c_inf());
            assert!(dp >= p.c_inf() - 1e-10, "δ₊ = {dp} < C_inf = {}", p.c_inf());
        }
    }

    #[test]
    fn band_profile_three_diagonal_example() {
        // N=6, W=2, uniform: distances 0, ±1 map to |x| ≤ 1/2, so three
        // circulant diagonals at 1/2 pre-normalization, 1/3 after.
        let p = band_profile(6, 2.0, BandShape::Uniform).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let diff = if i >= j { i - j } else { j - i };
                let d = diff.min(6 - diff);
                let expected = if d <= 1 { 1.0 / 3.0 } else { 0.0 };
                assert!((p.sigma2()[(i, j)] - expected).abs() < 1e-15);
            }
        }
        assert!((p.m_param() - 3.0).abs() < 1e-12);
        assert_eq!(p.c_inf(), 0.0);
        assert_eq!(p.pre_normalization_m(), Some(2.0));
        // Circulant eigenvalues (1 + 2cos(2πp/6))/3.
        let (dm, dp, simple) = p.spectral_gap();
        assert!(simple);
        assert!((dm - 2.0 / 3.0).abs() < 1e-12);
        assert!((dp - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn band_profile_full_band_recovers_wigner() {
        let n = 8;
        let p = band_profile(n, n as f64, BandShape::Uniform).unwrap();
        for v in p.sigma2().iter() {
            assert!((v - 1.0 / n as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn band_profile_rejects_wrapping_support() {
        assert!(matches!(
            band_profile(6, 7.0, BandShape::Uniform),
            Err(ProfileError::SupportTooWide { .. })
        ));
    }

    #[test]
    fn band_pre_normalization_bound() {
        // M_pre ≤ W/‖f‖_∞ for every shape.
        for shape in [BandShape::Uniform, BandShape::Triangular, BandShape::TruncatedGaussian] {
            let w = 8.0;
            let p = band_profile(64, w, shape).unwrap();
            let bound = w / shape.sup_norm();
            let m_pre = p.pre_normalization_m().unwrap();
            assert!(m_pre <= bound + 1e-12, "{shape:?}: {m_pre} vs {bound}");
        }
    }

    #[test]
    fn band_shapes_are_normalized_densities() {
        use crate::numerics::quadrature::integrate;
        for shape in [BandShape::Uniform, BandShape::Triangular, BandShape::TruncatedGaussian] {
            let total = integrate(|x| shape.evaluate(x), -0.5, 0.5, 1e-12).unwrap().0;
            assert!((total - 1.0).abs() < 1e-10, "{shape:?} integrates to {total}");
        }
    }

    #[test]
    fn band_spectrum_matches_dft_for_all_shapes() {
        for shape in [BandShape::Uniform, BandShape::Triangular, BandShape::TruncatedGaussian] {
            for &(n, w) in &[(16usize, 4.0), (48, 8.0), (31, 5.0)] {
                let p = band_profile(n, w, shape).unwrap();
                let dense = symmetric_eigvals(p.sigma2()).unwrap();
                let mut dft = circulant_spectrum(p.sigma2());
                dft.sort_by(|a, b| a.partial_cmp(b).unwrap());
                for (a, b) in dense.iter().zip(dft.iter()) {
                    assert!((a - b).abs() < 1e-9, "{shape:?} N={n} W={w}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn uniform_band_gap_bounded_away_from_minus_one() {
        // The uniform band transform is a normalized Dirichlet kernel with
        // minimum ≳ −0.22, so δ₋ stays above 0.2 comfortably.
        for &(n, w) in &[(64usize, 8.0), (128, 16.0), (96, 8.0)] {
            let p = band_profile(n, w, BandShape::Uniform).unwrap();
            assert!(p.delta_minus() >= 0.2, "N={n} W={w}: δ₋ = {}", p.delta_minus());
        }
    }

    #[test]
    fn profiles_round_trip_through_json() {
        let originals = vec![
            wigner_profile(5),
            band_profile(12, 4.0, BandShape::Triangular).unwrap(),
            generalized_profile(&ndarray::array![[1.0, 2.0], [2.0, 1.0]]).unwrap(),
        ];
        for p in originals {
            let json = p.to_json();
            let back = VarianceProfile::from_json(&json).unwrap();
            assert_eq!(p, back, "round trip through {json}");
            let value: serde_json::Value = serde_json::from_str(&json).unwrap();
            assert!(value.get("type").is_some());
            assert!(value.get("n").is_some());
        }
    }

    #[test]
    fn sigma2_csv_has_full_precision() {
        let p = wigner_profile(3);
        let csv = p.sigma2_csv();
        let first = csv.lines().next().unwrap();
        assert_eq!(first.split(',').count(), 3);
        assert!(first.contains("3.3333333333333331e-1"));
    }
}
