//! Standardized entry distributions with subexponential tails.
//!
//! Every law is centered with unit variance. The catalogue:
//!
//! - `Gaussian` — the standard normal;
//! - `Bernoulli` — symmetric ±1;
//! - `TwoGaussianMixture{a, b, σ}` — weight b/(a+b) on N(a, σ) and
//!   a/(a+b) on N(−b, σ), the workhorse for matching a prescribed third
//!   moment when |m₃| is not small;
//! - `SmoothedBetaMixture{d, β, ε, τ, a, b}` — the three-parameter family
//!   (1−ε)(ϑ_τ ∗ g_{d,β}) + ε·h with g_{d,β}(x) ∝ |x|^β on [−d, d], a C∞
//!   mollifier ϑ of width τ, and h the unit-variance two-Gaussian mixture
//!   above, used when |m₃| is small;
//! - `GaussianDivisible{base, γ}` — the law of √(1−γ)·ξ + √γ·ξ^G.
//!
//! `build_matching_law` constructs a smooth law with prescribed (m₃, m₄),
//! branching on |m₃| against δ. Moments are cached at construction and a
//! subexponential tail envelope P(|ξ| ≥ x^α) ≤ β_tail·e^{−x} is certified
//! for each law.

use crate::numerics::quadrature::{integrate, QuadratureError};
use crate::numerics::roots::{bisect, RootError};
use crate::numerics::stats::normal_cdf;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::OnceLock;

/// Default mollifier width for the smoothed family: far below every other
/// scale in play (d ≳ 1, β+1 ≳ 0.1), so the τ-corrections to the moments
/// sit near 1e−9, under the 1e−8 matching tolerance.
pub const DEFAULT_MOLLIFIER_WIDTH: f64 = 1e-4;

/// Moment-matching feasibility ceiling on m₄; far outside the compact
/// parameter regime the constructions are designed for.
const M4_CEILING: f64 = 1e6;

/// Errors from entry-law construction and evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum EntryLawError {
    /// A parameter is outside its admissible range.
    InvalidParameter { name: &'static str, value: f64 },
    /// The law is not centered/unit-variance within 1e−10.
    StandardizationViolated { m1: f64, m2: f64 },
    /// No smooth law with these (m₃, m₄) exists: needs m₄ − m₃² − 1 > 0.
    InfeasibleMoments { m3: f64, m4: f64, c1: f64 },
    /// An internal monotone solve failed to bracket its root.
    RootNotBracketed { context: &'static str },
    /// Numerical integration could not reach the requested tolerance.
    QuadratureFailure(QuadratureError),
}

impl fmt::Display for EntryLawError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntryLawError::InvalidParameter { name, value } => {
                write!(f, "invalid parameter {name} = {value}")
            }
            EntryLawError::StandardizationViolated { m1, m2 } => {
                write!(f, "law is not standardized: m1 = {m1:.3e}, m2 = {m2}")
            }
            EntryLawError::InfeasibleMoments { m3, m4, c1 } => write!(
                f,
                "no smooth law has moments (0, 1, {m3}, {m4}): m4 − m3² − 1 = {c1:.3e} must be positive"
            ),
            EntryLawError::RootNotBracketed { context } => {
                write!(f, "monotone solve failed to bracket a root ({context})")
            }
            EntryLawError::QuadratureFailure(e) => write!(f, "quadrature failure: {e}"),
        }
    }
}

impl std::error::Error for EntryLawError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            EntryLawError::QuadratureFailure(e) => Some(e),
            _ => None,
        }
    }
}

impl From<QuadratureError> for EntryLawError {
    fn from(e: QuadratureError) -> Self {
        EntryLawError::QuadratureFailure(e)
    }
}

/// The distribution family and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum LawKind {
    Gaussian,
    Bernoulli,
    TwoGaussianMixture {
        a: f64,
        b: f64,
        sigma: f64,
    },
    SmoothedBetaMixture {
        d: f64,
        beta: f64,
        eps: f64,
        tau: f64,
        a: f64,
        b: f64,
    },
    GaussianDivisible {
        base: Box<EntryLaw>,
        gamma: f64,
    },
}

/// First four moments (m₁, m₂, m₃, m₄), cached at construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
}

/// Tail envelope parameters: P(|ξ| ≥ x^α) ≤ β_tail·e^{−x} for all x ≥ 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Subexp {
    pub alpha: f64,
    pub beta_tail: f64,
}

/// A standardized entry distribution with cached moments and a certified
/// subexponential envelope. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct EntryLaw {
    kind: LawKind,
    moments: Moments,
    subexp: Subexp,
}

/// Wire format: {kind, params, subexp}. Moments are recomputed on load by
/// the same deterministic code path, so the round trip is exact.
#[derive(Serialize, Deserialize)]
struct LawWire {
    #[serde(flatten)]
    kind: LawKind,
    subexp: Subexp,
}

impl Serialize for EntryLaw {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        LawWire { kind: self.kind.clone(), subexp: self.subexp }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for EntryLaw {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let wire = LawWire::deserialize(d)?;
        EntryLaw::from_parts(wire.kind, Some(wire.subexp))
            .map_err(|e| serde::de::Error::custom(e.to_string()))
    }
}

// ---------------------------------------------------------------------------
// Mollifier: ϑ(x) ∝ exp(−1/(1−x²)) on (−1, 1), symmetric, C∞, compactly
// supported. Its normalization and even moments are computed once by
// adaptive quadrature at tolerance 1e−13 (below the 1e−10 moment target).
// ---------------------------------------------------------------------------

fn bump_unnormalized(x: f64) -> f64 {
    if x.abs() < 1.0 {
        (-1.0 / (1.0 - x * x)).exp()
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy)]
struct MollifierMoments {
    /// ∫ϑ̃ with ϑ̃ the unnormalized bump; ϑ = ϑ̃/mass.
    mass: f64,
    /// μ₂ = ∫x²ϑ(x)dx.
    mu2: f64,
    /// μ₄ = ∫x⁴ϑ(x)dx.
    mu4: f64,
}

fn mollifier_moments() -> &'static MollifierMoments {
    static CELL: OnceLock<MollifierMoments> = OnceLock::new();
    CELL.get_or_init(|| {
        let raw = |k: i32| {
            integrate(|x| x.powi(k) * bump_unnormalized(x), -1.0, 1.0, 1e-13)
                .expect("bump quadrature")
                .0
        };
        let mass = raw(0);
        MollifierMoments { mass, mu2: raw(2) / mass, mu4: raw(4) / mass }
    })
}

/// Normalized mollifier density ϑ(x).
pub fn mollifier_density(x: f64) -> f64 {
    bump_unnormalized(x) / mollifier_moments().mass
}

// ---------------------------------------------------------------------------
// Moment helpers
// ---------------------------------------------------------------------------

/// Moments of the two-Gaussian mixture with component variance `sigma`:
/// m₂ = σ + ab, m₃ = ab(a−b), m₄ = 3σ² + 6σab + ab(a² + b² − ab).
fn two_gaussian_moments(a: f64, b: f64, sigma: f64) -> Moments {
    let ab = a * b;
    Moments {
        m1: 0.0,
        m2: sigma + ab,
        m3: ab * (a - b),
        m4: 3.0 * sigma * sigma + 6.0 * sigma * ab + ab * (a * a + b * b - ab),
    }
}

/// Even raw moment ∫|x|^k g_{d,β} = (β+1)·d^k/(β+1+k); odd moments vanish.
fn beta_block_moment(d: f64, beta: f64, k: u32) -> f64 {
    if k % 2 == 1 {
        0.0
    } else {
        (beta + 1.0) * d.powi(k as i32) / (beta + 1.0 + k as f64)
    }
}

/// Moments of the smoothed family via the convolution transfer identity
/// E(X + τΘ)^k = Σ_j C(k,j) τ^j μ_j(ϑ) E X^{k−j} (odd μ_j vanish).
fn smoothed_beta_moments(d: f64, beta: f64, eps: f64, tau: f64, a: f64, b: f64) -> Moments {
    let th = mollifier_moments();
    let g2 = beta_block_moment(d, beta, 2);
    let g4 = beta_block_moment(d, beta, 4);
    let t2 = tau * tau * th.mu2;
    let t4 = tau.powi(4) * th.mu4;
    let h = two_gaussian_moments(a, b, 1.0);
    Moments {
        m1: 0.0,
        m2: (1.0 - eps) * (g2 + t2) + eps * h.m2,
        m3: eps * h.m3,
        m4: (1.0 - eps) * (g4 + 6.0 * g2 * t2 + t4) + eps * h.m4,
    }
}

fn normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    (-d * d / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

/// P(|N(mean, var)| ≥ x) for x ≥ 0.
fn normal_abs_tail(x: f64, mean: f64, var: f64) -> f64 {
    let s = var.sqrt();
    (1.0 - normal_cdf((x - mean) / s)) + (1.0 - normal_cdf((-x - mean) / s))
}

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

impl EntryLaw {
    /// The standard normal law.
    pub fn gaussian() -> Self {
        EntryLaw {
            kind: LawKind::Gaussian,
            moments: Moments { m1: 0.0, m2: 1.0, m3: 0.0, m4: 3.0 },
            // P(|ξ| ≥ x) = erfc(x/√2) ≤ √e·e^{−x} for all x ≥ 0 (the ratio
            // peaks near 1.04 around x ≈ 0.3).
            subexp: Subexp { alpha: 1.0, beta_tail: std::f64::consts::E.sqrt() },
        }
    }

    /// The symmetric ±1 law.
    pub fn bernoulli() -> Self {
        EntryLaw {
            kind: LawKind::Bernoulli,
            moments: Moments { m1: 0.0, m2: 1.0, m3: 0.0, m4: 1.0 },
            // P(|ξ| ≥ x) = 1(x ≤ 1) ≤ e·e^{−x}; padded 5% clear of the
            // floating-point equality at x = 1.
            subexp: Subexp { alpha: 1.0, beta_tail: 1.05 * std::f64::consts::E },
        }
    }

    /// Two-Gaussian mixture with weight b/(a+b) on N(a, σ) and a/(a+b) on
    /// N(−b, σ). Requires a, b > 0, σ ∈ (0,1), and standardization
    /// σ + ab = 1 within 1e−10.
    pub fn two_gaussian_mixture(a: f64, b: f64, sigma: f64) -> Result<Self, EntryLawError> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(EntryLawError::InvalidParameter { name: "a", value: a });
        }
        if !(b > 0.0) || !b.is_finite() {
            return Err(EntryLawError::InvalidParameter { name: "b", value: b });
        }
        if !(sigma > 0.0 && sigma < 1.0) {
            return Err(EntryLawError::InvalidParameter { name: "sigma", value: sigma });
        }
        let kind = LawKind::TwoGaussianMixture { a, b, sigma };
        EntryLaw::from_parts(kind, None)
    }

    /// The smoothed three-parameter family (1−ε)(ϑ_τ ∗ g_{d,β}) + ε·h.
    pub fn smoothed_beta_mixture(
        d: f64,
        beta: f64,
        eps: f64,
        tau: f64,
        a: f64,
        b: f64,
    ) -> Result<Self, EntryLawError> {
        if !(d > 0.0) || !d.is_finite() {
            return Err(EntryLawError::InvalidParameter { name: "d", value: d });
        }
        if !(beta > -1.0) || !beta.is_finite() {
            return Err(EntryLawError::InvalidParameter { name: "beta", value: beta });
        }
        if !(0.0..1.0).contains(&eps) {
            return Err(EntryLawError::InvalidParameter { name: "eps", value: eps });
        }
        if !(tau >= 0.0) || !tau.is_finite() {
            return Err(EntryLawError::InvalidParameter { name: "tau", value: tau });
        }
        if !(a > 0.0) || !(b > 0.0) {
            return Err(EntryLawError::InvalidParameter { name: "a", value: a });
        }
        let kind = LawKind::SmoothedBetaMixture { d, beta, eps, tau, a, b };
        EntryLaw::from_parts(kind, None)
    }

    /// The law of √(1−γ)·ξ + √γ·ξ^G with ξ ∼ base. γ = 0 is the identity
    /// and returns the base unchanged.
    pub fn gaussian_divisible(base: EntryLaw, gamma: f64) -> Result<Self, EntryLawError> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(EntryLawError::InvalidParameter { name: "gamma", value: gamma });
        }
        if gamma == 0.0 {
            return Ok(base);
        }
        let kind = LawKind::GaussianDivisible { base: Box::new(base), gamma };
        EntryLaw::from_parts(kind, None)
    }

    /// Builds a smooth standardized law with moments (0, 1, m₃, m₄) to
    /// within 1e−8, feasible iff C₁ = m₄ − m₃² − 1 > 0.
    ///
    /// Branching at |m₃| ≥ δ (callers normally pass δ = min(1, C₁)/100):
    /// - |m₃| ≥ δ: a two-Gaussian mixture; σ ∈ (0,1) solves
    ///   m₄ = 1 + m₃²/(1−σ) + 4σ − 2σ² (monotone in σ), then ab = 1−σ and
    ///   a − b = m₃/(1−σ).
    /// - |m₃| < δ: the smoothed family with a = 2, b = 1, ε = m₃/2,
    ///   τ = 1e−4; β solves the fourth-moment equation by monotone
    ///   bisection with bracket expansion, then d² = m₂(g)·(β+3)/(β+1).
    ///
    /// Negative m₃ is built for |m₃| and reflected (a ↔ b), as the mixture
    /// families are sign-symmetric under that swap.
    pub fn build_matching_law(m3: f64, m4: f64, delta: f64) -> Result<Self, EntryLawError> {
        if !m3.is_finite() {
            return Err(EntryLawError::InvalidParameter { name: "m3", value: m3 });
        }
        if !m4.is_finite() {
            return Err(EntryLawError::InvalidParameter { name: "m4", value: m4 });
        }
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(EntryLawError::InvalidParameter { name: "delta", value: delta });
        }
        let c1 = m4 - m3 * m3 - 1.0;
        if !(c1 > 0.0) || m4 > M4_CEILING {
            return Err(EntryLawError::InfeasibleMoments { m3, m4, c1 });
        }
        let law = Self::build_nonnegative_skew(m3.abs(), m4, delta)?;
        if m3 < 0.0 {
            Ok(law.reflected())
        } else {
            Ok(law)
        }
    }

    /// The matching construction for m₃ ≥ 0.
    fn build_nonnegative_skew(m3: f64, m4: f64, delta: f64) -> Result<Self, EntryLawError> {
        if m3 >= delta {
            // Solve F(σ) = 1 + m₃²/(1−σ) + 4σ − 2σ² − m₄ = 0; F is strictly
            // increasing on (0,1), F(0⁺) = −C₁ < 0, F(1⁻) = +∞.
            let f = |s: f64| 1.0 + m3 * m3 / (1.0 - s) + 4.0 * s - 2.0 * s * s - m4;
            let mut sigma = bisect(f, 1e-12, 1.0 - 1e-12, 1e-13)
                .map_err(|_: RootError| EntryLawError::RootNotBracketed { context: "sigma" })?;
            // Newton polish to machine precision.
            for _ in 0..4 {
                let fp = m3 * m3 / ((1.0 - sigma) * (1.0 - sigma)) + 4.0 - 4.0 * sigma;
                sigma -= f(sigma) / fp;
            }
            let ab = 1.0 - sigma;
            let diff = m3 / (1.0 - sigma);
            let a = (diff + (diff * diff + 4.0 * ab).sqrt()) / 2.0;
            let b = a - diff;
            EntryLaw::two_gaussian_mixture(a, b, sigma)
        } else {
            // Smoothed family; ratios against the mollified second moment.
            let eps = m3 / 2.0;
            let tau = DEFAULT_MOLLIFIER_WIDTH;
            let th = mollifier_moments();
            let t2 = tau * tau * th.mu2;
            let t4 = tau.powi(4) * th.mu4;
            let m2g = (1.0 - 3.0 * eps) / (1.0 - eps) - t2;
            let h4 = two_gaussian_moments(2.0, 1.0, 1.0).m4;
            // Target for R(β) = (β+3)²/((β+1)(β+5)), strictly decreasing
            // from +∞ to 1 on (−1, ∞).
            let t_r =
                ((m4 - h4 * eps) / (1.0 - eps) - 6.0 * m2g * t2 - t4) / (m2g * m2g);
            if !(t_r > 1.0) {
                return Err(EntryLawError::RootNotBracketed { context: "beta target" });
            }
            let r = |beta: f64| (beta + 3.0) * (beta + 3.0) / ((beta + 1.0) * (beta + 5.0));
            // Bracket expansion upward from β = 1 until R drops below t_R.
            let lo = -1.0 + 1e-9;
            let mut hi = 1.0;
            while r(hi) > t_r {
                hi = 2.0 * hi + 1.0;
                if hi > 1e12 {
                    return Err(EntryLawError::RootNotBracketed { context: "beta bracket" });
                }
            }
            let mut beta = bisect(|x| r(x) - t_r, lo, hi, 1e-13)
                .map_err(|_: RootError| EntryLawError::RootNotBracketed { context: "beta" })?;
            for _ in 0..4 {
                let p = (beta + 1.0) * (beta + 5.0);
                let rp = -4.0 * (2.0 * beta + 6.0) / (p * p);
                beta -= (r(beta) - t_r) / rp;
            }
            let d = (m2g * (beta + 3.0) / (beta + 1.0)).sqrt();
            EntryLaw::smoothed_beta_mixture(d, beta, eps, tau, 2.0, 1.0)
        }
    }

    /// The law of −ξ: swaps a ↔ b in the mixture components, negating m₃.
    fn reflected(&self) -> Self {
        let kind = match &self.kind {
            LawKind::TwoGaussianMixture { a, b, sigma } => {
                LawKind::TwoGaussianMixture { a: *b, b: *a, sigma: *sigma }
            }
            LawKind::SmoothedBetaMixture { d, beta, eps, tau, a, b } => {
                LawKind::SmoothedBetaMixture {
                    d: *d,
                    beta: *beta,
                    eps: *eps,
                    tau: *tau,
                    a: *b,
                    b: *a,
                }
            }
            other => other.clone(),
        };
        EntryLaw {
            kind,
            moments: Moments { m3: -self.moments.m3, ..self.moments },
            subexp: self.subexp,
        }
    }

    /// Validates parameters, computes and caches moments, certifies the
    /// tail envelope (or keeps a provided one), and checks standardization.
    fn from_parts(kind: LawKind, subexp: Option<Subexp>) -> Result<Self, EntryLawError> {
        let moments = match &kind {
            LawKind::Gaussian => Moments { m1: 0.0, m2: 1.0, m3: 0.0, m4: 3.0 },
            LawKind::Bernoulli => Moments { m1: 0.0, m2: 1.0, m3: 0.0, m4: 1.0 },
            LawKind::TwoGaussianMixture { a, b, sigma } => two_gaussian_moments(*a, *b, *sigma),
            LawKind::SmoothedBetaMixture { d, beta, eps, tau, a, b } => {
                smoothed_beta_moments(*d, *beta, *eps, *tau, *a, *b)
            }
            LawKind::GaussianDivisible { base, gamma } => {
                let bm = base.moments;
                let g = *gamma;
                Moments {
                    m1: 0.0,
                    m2: (1.0 - g) * bm.m2 + g,
                    m3: (1.0 - g).powf(1.5) * bm.m3,
                    m4: (1.0 - g) * (1.0 - g) * bm.m4 + 6.0 * g - 3.0 * g * g,
                }
            }
        };
        if moments.m1.abs() > 1e-10 || (moments.m2 - 1.0).abs() > 1e-10 {
            return Err(EntryLawError::StandardizationViolated { m1: moments.m1, m2: moments.m2 });
        }
        let subexp = subexp.unwrap_or_else(|| certify_subexp(&kind));
        Ok(EntryLaw { kind, moments, subexp })
    }

    pub fn kind(&self) -> &LawKind {
        &self.kind
    }

    /// Cached first four moments (m₁, m₂, m₃, m₄).
    pub fn exact_moments(&self) -> (f64, f64, f64, f64) {
        (self.moments.m1, self.moments.m2, self.moments.m3, self.moments.m4)
    }

    pub fn moments(&self) -> Moments {
        self.moments
    }

    pub fn subexp(&self) -> Subexp {
        self.subexp
    }

    /// One draw from the law.
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            LawKind::Gaussian => StandardNormal.sample(rng),
            LawKind::Bernoulli => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            LawKind::TwoGaussianMixture { a, b, sigma } => {
                let mean = if rng.random::<f64>() < b / (a + b) { *a } else { -*b };
                let g: f64 = StandardNormal.sample(rng);
                mean + sigma.sqrt() * g
            }
            LawKind::SmoothedBetaMixture { d, beta, eps, tau, a, b } => {
                if rng.random::<f64>() < *eps {
                    let mean = if rng.random::<f64>() < b / (a + b) { *a } else { -*b };
                    let g: f64 = StandardNormal.sample(rng);
                    mean + g
                } else {
                    // |X| = d·U^{1/(β+1)} inverts the CDF (x/d)^{β+1};
                    // random sign; then the mollifier jitter τΘ.
                    let u: f64 = rng.random();
                    let mag = d * u.powf(1.0 / (beta + 1.0));
                    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    sign * mag + tau * sample_mollifier(rng)
                }
            }
            LawKind::GaussianDivisible { base, gamma } => {
                let g: f64 = StandardNormal.sample(rng);
                (1.0 - gamma).sqrt() * base.sample_one(rng) + gamma.sqrt() * g
            }
        }
    }

    /// n i.i.d. draws; deterministic for a fixed generator state.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.sample_one(rng)).collect()
    }

    /// Pointwise density, when the law has one (Bernoulli does not).
    ///
    /// For the smoothed family with τ > 0 the mollifier convolution is
    /// evaluated by adaptive quadrature, split at the moving singularity of
    /// |·|^β when β < 0. Used by validation, not by hot paths.
    pub fn density(&self, x: f64) -> Option<f64> {
        match &self.kind {
            LawKind::Gaussian => Some(normal_pdf(x, 0.0, 1.0)),
            LawKind::Bernoulli => None,
            LawKind::TwoGaussianMixture { a, b, sigma } => {
                let wp = b / (a + b);
                Some(wp * normal_pdf(x, *a, *sigma) + (1.0 - wp) * normal_pdf(x, -*b, *sigma))
            }
            LawKind::SmoothedBetaMixture { d, beta, eps, tau, a, b } => {
                let wp = b / (a + b);
                let h = wp * normal_pdf(x, *a, 1.0) + (1.0 - wp) * normal_pdf(x, -*b, 1.0);
                let g = if *tau == 0.0 {
                    beta_block_density(x, *d, *beta)
                } else {
                    mollified_beta_density(x, *d, *beta, *tau)
                };
                Some((1.0 - eps) * g + eps * h)
            }
            LawKind::GaussianDivisible { base, gamma } => {
                let c = (1.0 - gamma).sqrt();
                let s2 = *gamma;
                match base.kind() {
                    LawKind::Gaussian => Some(normal_pdf(x, 0.0, 1.0)),
                    LawKind::Bernoulli => {
                        Some(0.5 * normal_pdf(x, c, s2) + 0.5 * normal_pdf(x, -c, s2))
                    }
                    LawKind::TwoGaussianMixture { a, b, sigma } => {
                        let wp = b / (a + b);
                        Some(
                            wp * normal_pdf(x, c * a, c * c * sigma + s2)
                                + (1.0 - wp) * normal_pdf(x, -c * b, c * c * sigma + s2),
                        )
                    }
                    _ => {
                        // f(x) = ∫ f_base(v)·φ_{γ}(x − cv) dv over the
                        // effective support of the base.
                        let radius = 50.0;
                        let val = integrate(
                            |v| base.density(v).unwrap_or(0.0) * normal_pdf(x, c * v, s2),
                            -radius,
                            radius,
                            1e-10,
                        )
                        .ok()?
                        .0;
                        Some(val)
                    }
                }
            }
        }
    }
}

/// Density of g_{d,β}: ((β+1)/2d^{β+1})·|x|^β on [−d, d].
fn beta_block_density(x: f64, d: f64, beta: f64) -> f64 {
    if x.abs() > d {
        0.0
    } else {
        (beta + 1.0) / (2.0 * d.powf(beta + 1.0)) * x.abs().powf(beta)
    }
}

/// (ϑ_τ ∗ g_{d,β})(x) = ∫ϑ(u)·g(x − τu)du.
///
/// For β < 0 the convolution has a moving algebraic singularity at u = x/τ.
/// When that point falls inside the mollifier support, bisection toward it
/// stalls at f64 resolution long before reaching the tolerance, so each side
/// is flattened by the substitution t = s^{1/(1+β)}, under which t^β dt turns
/// into ds/(1+β) and the integrand becomes C¹.
fn mollified_beta_density(x: f64, d: f64, beta: f64, tau: f64) -> f64 {
    let singular = x / tau;
    if beta < 0.0 && singular > -1.0 && singular < 1.0 && x.abs() + tau <= d {
        // Every translate x − τu stays inside [−d, d], so g is the pure power
        // law c·|x − τu|^β = c·τ^β·|u − u*|^β with u* = x/τ.
        let c = (beta + 1.0) / (2.0 * d.powf(beta + 1.0)) * tau.powf(beta);
        let p = 1.0 / (1.0 + beta);
        let right = (1.0 - singular).powf(1.0 + beta);
        let left = (1.0 + singular).powf(1.0 + beta);
        let i_right = integrate(|s| mollifier_density(singular + s.powf(p)), 0.0, right, 1e-12)
            .map(|r| r.0)
            .unwrap_or(0.0);
        let i_left = integrate(|s| mollifier_density(singular - s.powf(p)), 0.0, left, 1e-12)
            .map(|r| r.0)
            .unwrap_or(0.0);
        return c * p * (i_right + i_left);
    }
    let integrand = |u: f64| mollifier_density(u) * beta_block_density(x - tau * u, d, beta);
    integrate(integrand, -1.0, 1.0, 1e-11).map(|r| r.0).unwrap_or(0.0)
}

/// Accept–reject draw from the normalized bump on [−1, 1]; the uniform
/// proposal is bounded by the mode ϑ̃(0) = e⁻¹.
fn sample_mollifier<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let peak = (-1.0f64).exp();
    loop {
        let x = rng.random_range(-1.0..1.0);
        let y: f64 = rng.random::<f64>() * peak;
        if y <= bump_unnormalized(x) {
            return x;
        }
    }
}

// ---------------------------------------------------------------------------
// Tail certification
// ---------------------------------------------------------------------------

/// Certifies P(|ξ| ≥ x) ≤ β_tail·e^{−x} (α = 1 throughout) by bounding the
/// exact tail from above on a dense grid and padding by 50%.
fn certify_subexp(kind: &LawKind) -> Subexp {
    let upper: Box<dyn Fn(f64) -> f64> = match kind {
        LawKind::Gaussian => Box::new(|x| normal_abs_tail(x, 0.0, 1.0)),
        LawKind::Bernoulli => Box::new(|x| if x <= 1.0 { 1.0 } else { 0.0 }),
        LawKind::TwoGaussianMixture { a, b, sigma } => {
            let (a, b, sigma) = (*a, *b, *sigma);
            let wp = b / (a + b);
            Box::new(move |x| {
                wp * normal_abs_tail(x, a, sigma) + (1.0 - wp) * normal_abs_tail(x, -b, sigma)
            })
        }
        LawKind::SmoothedBetaMixture { d, eps, tau, a, b, .. } => {
            let (d, eps, tau, a, b) = (*d, *eps, *tau, *a, *b);
            let wp = b / (a + b);
            Box::new(move |x| {
                let bounded = if x <= d + tau { 1.0 } else { 0.0 };
                let h = wp * normal_abs_tail(x, a, 1.0) + (1.0 - wp) * normal_abs_tail(x, -b, 1.0);
                (1.0 - eps) * bounded + eps * h
            })
        }
        LawKind::GaussianDivisible { base, gamma } => {
            let g = *gamma;
            let bs = base.subexp();
            // Union bound: {|ξ'| ≥ x} ⊂ {√(1−γ)|ξ| ≥ x/2} ∪ {√γ|G| ≥ x/2}.
            Box::new(move |x| {
                let from_base = if g < 1.0 {
                    let y = x / (2.0 * (1.0 - g).sqrt());
                    (bs.beta_tail * (-y.powf(1.0 / bs.alpha)).exp()).min(1.0)
                } else {
                    0.0
                };
                let from_noise = if g > 0.0 {
                    normal_abs_tail(x / (2.0 * g.sqrt()), 0.0, 1.0)
                } else {
                    0.0
                };
                (from_base + from_noise).min(1.0)
            })
        }
    };
    let mut best = 1.0f64;
    for k in 1..=40 {
        let x = 0.25 * k as f64;
        best = best.max(upper(x) * x.exp());
    }
    Subexp { alpha: 1.0, beta_tail: 1.5 * best }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
