//! Small-sample statistics: moments, quantiles, Kolmogorov–Smirnov tests,
//! least-squares fits, and seeded bootstrap resampling.
//!
//! The Kolmogorov–Smirnov machinery is used for distributional comparisons
//! (pooled gap samples vs a reference ensemble, flowed entries vs Gaussian);
//! p-values use the asymptotic Kolmogorov distribution
//! Q(λ) = 2 Σ_{k≥1} (−1)^{k−1} e^{−2k²λ²}.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Sample mean; 0 for an empty slice.
pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance (n−1 denominator); 0 for fewer than two points.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Standard error of the mean.
pub fn std_error(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    (variance(xs) / xs.len() as f64).sqrt()
}

/// k-th raw sample moment (1/n)Σ xᵢ^k.
pub fn raw_moment(xs: &[f64], k: u32) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().map(|x| x.powi(k as i32)).sum::<f64>() / xs.len() as f64
}

/// Linear-interpolated quantile of `sorted` (ascending) at p ∈ [0, 1].
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let p = p.clamp(0.0, 1.0);
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = h - lo as f64;
        sorted[lo] * (1.0 - frac) + sorted[hi] * frac
    }
}

/// Median via sorting a copy.
pub fn median(xs: &[f64]) -> f64 {
    assert!(!xs.is_empty(), "median of empty sample");
    let mut s = xs.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    quantile_sorted(&s, 0.5)
}

/// Survival function of the Kolmogorov distribution,
/// Q(λ) = 2 Σ_{k≥1} (−1)^{k−1} e^{−2k²λ²}.
///
/// For small λ the alternating series loses accuracy, so the dual theta-series
/// for the CDF, (√(2π)/λ)·Σ_{k≥1} exp(−(2k−1)²π²/(8λ²)), is used instead.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 0.4 {
        let mut cdf = 0.0;
        for k in 1..=20 {
            let odd = (2 * k - 1) as f64;
            cdf += (-odd * odd * std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda)).exp();
        }
        cdf *= (2.0 * std::f64::consts::PI).sqrt() / lambda;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let mut q = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        q += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * q).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov–Smirnov test: returns (D, asymptotic p-value).
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert!(!xs.is_empty() && !ys.is_empty(), "KS needs nonempty samples");
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(|p, q| p.partial_cmp(q).expect("finite values"));
    b.sort_by(|p, q| p.partial_cmp(q).expect("finite values"));
    let (n, m) = (a.len(), b.len());
    let mut i = 0_usize;
    let mut j = 0_usize;
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let n_eff = (n as f64 * m as f64) / (n + m) as f64;
    (d, kolmogorov_survival(n_eff.sqrt() * d))
}

/// One-sample Kolmogorov–Smirnov test against a CDF: returns (D, p-value).
pub fn ks_one_sample<F: Fn(f64) -> f64>(xs: &[f64], cdf: F) -> (f64, f64) {
    assert!(!xs.is_empty(), "KS needs a nonempty sample");
    let mut a = xs.to_vec();
    a.sort_by(|p, q| p.partial_cmp(q).expect("finite values"));
    let n = a.len() as f64;
    let mut d: f64 = 0.0;
    for (idx, &x) in a.iter().enumerate() {
        let f = cdf(x);
        d = d.max(((idx + 1) as f64 / n - f).abs());
        d = d.max((f - idx as f64 / n).abs());
    }
    (d, kolmogorov_survival(n.sqrt() * d))
}

/// Standard normal CDF Φ(x) = erfc(−x/√2)/2.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// Ordinary least squares y ≈ slope·x + intercept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope (residual-based, n−2 denominator).
    pub slope_stderr: f64,
}

/// Fits a line by least squares; requires at least two distinct x values.
pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    assert_eq!(x.len(), y.len(), "mismatched fit inputs");
    assert!(x.len() >= 2, "fit needs at least two points");
    let n = x.len() as f64;
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|xi| (xi - mx) * (xi - mx)).sum();
    assert!(sxx > 0.0, "fit needs distinct x values");
    let sxy: f64 = x.iter().zip(y).map(|(xi, yi)| (xi - mx) * (yi - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| {
            let r = yi - (slope * xi + intercept);
            r * r
        })
        .sum();
    let slope_stderr = if x.len() > 2 {
        (ssr / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    LinearFit { slope, intercept, slope_stderr }
}

/// Draws `n` bootstrap indices (i.i.d. uniform over 0..n) from `rng`.
pub fn resample_indices(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}
