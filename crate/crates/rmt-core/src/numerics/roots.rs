//! Bracketed root finding for monotone scalar equations.
//!
//! The moment-matching solves (σ for the two-Gaussian mixture, β for the
//! smoothed power-law family) and the classical-location equation
//! N·n_sc(γ) = j are all strictly monotone on their brackets, so plain
//! bisection is robust and provably convergent; no derivative bookkeeping.

use std::fmt;

/// Failure modes of the bracketed solvers.
#[derive(Debug, Clone, PartialEq)]
pub enum RootError {
    /// f(a) and f(b) have the same sign: no root is bracketed.
    NotBracketed { a: f64, b: f64, fa: f64, fb: f64 },
    /// The function returned a non-finite value inside the bracket.
    NonFinite { x: f64 },
}

impl fmt::Display for RootError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RootError::NotBracketed { a, b, fa, fb } => write!(
                f,
                "root not bracketed on [{a:.6e}, {b:.6e}]: f(a) = {fa:.6e}, f(b) = {fb:.6e}"
            ),
            RootError::NonFinite { x } => write!(f, "function non-finite at x = {x:.6e}"),
        }
    }
}

impl std::error::Error for RootError {}

/// Bisection on [a, b] to absolute x-tolerance `tol`.
///
/// Requires f(a)·f(b) ≤ 0. Returns the midpoint of the final bracket; with
/// tol = 1e−12 this takes ≤ 64 iterations for brackets of width ≤ 10⁴.
pub fn bisect<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64, RootError> {
    let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if !f_lo.is_finite() {
        return Err(RootError::NonFinite { x: lo });
    }
    if !f_hi.is_finite() {
        return Err(RootError::NonFinite { x: hi });
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(RootError::NotBracketed { a: lo, b: hi, fa: f_lo, fb: f_hi });
    }
    // 200 iterations halve the bracket far below any tol ≥ 1e−300.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let f_mid = f(mid);
        if !f_mid.is_finite() {
            return Err(RootError::NonFinite { x: mid });
        }
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Expands [a, b] geometrically (factor 2 about its center) until the bracket
/// straddles a sign change, then bisects. At most `max_expand` doublings.
pub fn bisect_with_expansion<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_expand: u32,
) -> Result<f64, RootError> {
    let mut lo = a.min(b);
    let mut hi = a.max(b);
    for _ in 0..=max_expand {
        let f_lo = f(lo);
        let f_hi = f(hi);
        if f_lo.is_finite() && f_hi.is_finite() && f_lo.signum() != f_hi.signum() {
            return bisect(f, lo, hi, tol);
        }
        let center = 0.5 * (lo + hi);
        let half = (hi - lo).max(f64::MIN_POSITIVE);
        lo = center - half;
        hi = center + half;
    }
    let fa = f(lo);
    let fb = f(hi);
    Err(RootError::NotBracketed { a: lo, b: hi, fa, fb })
}
