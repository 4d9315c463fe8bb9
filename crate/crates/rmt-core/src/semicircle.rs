//! Closed-form semicircle analytics.
//!
//! - `msc(z)`: the Stieltjes transform of the semicircle law, i.e. the root
//!   of m² + zm + 1 = 0 with Im m > 0;
//! - `rho_sc` / `n_sc`: density ρ_sc(x) = (2π)⁻¹√(4−x²)₊ and its CDF in
//!   closed form;
//! - `classical_locations`: the deterministic eigenvalue predictions γ_j
//!   with N·n_sc(γ_j) = j;
//! - `control_g`: the spectral-domain control function
//!   g(z) = min{√(κ+η), max{δ₊, |Re m_sc(z)² − 1|}};
//! - `stable_branch`: the root of s + 1/(z+s) = t continuously connected to
//!   m_sc(z) at t = 0, followed by homotopy continuation.

use crate::numerics::roots::bisect;
use crate::C64;
use std::f64::consts::PI;
use std::fmt;

/// Errors from the semicircle analytics.
#[derive(Debug, Clone, PartialEq)]
pub enum SemicircleError {
    /// The spectral parameter must satisfy Im z > 0.
    DomainError { z: C64 },
    /// The two branch roots cannot be told apart at this (z, t).
    BranchAmbiguous { z: C64, t: C64, separation: f64 },
}

impl fmt::Display for SemicircleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemicircleError::DomainError { z } => {
                write!(f, "spectral parameter must have Im z > 0, got z = {z}")
            }
            SemicircleError::BranchAmbiguous { z, t, separation } => write!(
                f,
                "branch roots separated by only {separation:.3e} at z = {z}, t = {t}"
            ),
        }
    }
}

impl std::error::Error for SemicircleError {}

/// √(z² − 4) with the sign aligned against cancellation in z + √(z²−4).
///
/// The principal square root is flipped when Re(z̄·s) < 0, so |z + s| is
/// maximized and the quadratic-root formula below stays fully accurate for
/// large |z|.
fn sqrt_z2_minus_4(z: C64) -> C64 {
    let mut s = (z * z - C64::new(4.0, 0.0)).sqrt();
    if z.re * s.re + z.im * s.im < 0.0 {
        s = -s;
    }
    s
}

/// Stieltjes transform m_sc(z) of the semicircle law, for Im z > 0.
///
/// Solves m² + zm + 1 = 0 via the cancellation-free pair
/// {−q/2, −2/q} with q = z + √(z²−4), and returns the root with Im m > 0.
/// The residual |m + 1/(z+m)| is at machine-precision scale for |z| ≤ 10⁶.
pub fn msc(z: C64) -> Result<C64, SemicircleError> {
    if !(z.im > 0.0) {
        return Err(SemicircleError::DomainError { z });
    }
    let q = z + sqrt_z2_minus_4(z);
    let root_a = -q / 2.0;
    let root_b = -C64::new(2.0, 0.0) / q;
    // The two roots multiply to 1; exactly one lies in the upper half plane.
    Ok(if root_a.im > 0.0 { root_a } else { root_b })
}

/// Semicircle density ρ_sc(x) = (2π)⁻¹ √(4 − x²) on [−2, 2], else 0.
pub fn rho_sc(e: f64) -> f64 {
    let disc = 4.0 - e * e;
    if disc <= 0.0 {
        0.0
    } else {
        disc.sqrt() / (2.0 * PI)
    }
}

/// CDF of the semicircle law,
/// n_sc(E) = (2π)⁻¹ [ (E/2)√(4−E²) + 2·asin(E/2) + π ] clamped to [0, 1].
pub fn n_sc(e: f64) -> f64 {
    if e <= -2.0 {
        return 0.0;
    }
    if e >= 2.0 {
        return 1.0;
    }
    ((e / 2.0) * (4.0 - e * e).sqrt() + 2.0 * (e / 2.0).asin() + PI) / (2.0 * PI)
}

/// Classical locations γ_1 < … < γ_N solving N·n_sc(γ_j) = j.
///
/// Monotone bisection on [−2, 2] to absolute tolerance 1e−12; γ_N = 2
/// exactly because n_sc(2) = 1 exactly.
pub fn classical_locations(n: usize) -> Vec<f64> {
    assert!(n >= 1, "need at least one location");
    (1..=n)
        .map(|j| {
            let target = j as f64 / n as f64;
            bisect(|x| n_sc(x) - target, -2.0, 2.0, 1e-12)
                .expect("n_sc − target changes sign on [−2, 2]")
        })
        .collect()
}

/// Distance to the spectral edge, κ = ||E| − 2|.
pub fn kappa(e: f64) -> f64 {
    (e.abs() - 2.0).abs()
}

/// Control function g(z) = min{ √(κ+η), max{ δ₊, |Re m_sc(z)² − 1| } }.
pub fn control_g(z: C64, delta_plus: f64) -> Result<f64, SemicircleError> {
    let m = msc(z)?;
    let msq = m * m;
    let inner = delta_plus.max((msq.re - 1.0).abs());
    Ok((kappa(z.re) + z.im).sqrt().min(inner))
}

/// A spectral-domain scan point with its derived control quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlPoint {
    /// Energy E = Re z.
    pub e: f64,
    /// Spectral resolution η = Im z > 0.
    pub eta: f64,
    /// z = E + iη.
    pub z: C64,
    /// Edge distance κ = ||E| − 2|.
    pub kappa: f64,
    /// Control value g(z) for the profile's δ₊.
    pub g: f64,
}

impl ControlPoint {
    /// Builds the scan point, evaluating κ and g(z) for the given δ₊.
    pub fn new(e: f64, eta: f64, delta_plus: f64) -> Result<Self, SemicircleError> {
        let z = C64::new(e, eta);
        let g = control_g(z, delta_plus)?;
        Ok(ControlPoint { e, eta, z, kappa: kappa(e), g })
    }
}

/// Both roots of s + 1/(z+s) = t, i.e. of s² + (z−t)s + (1−tz) = 0.
///
/// Root separation is |√((z+t)²−4)|. Computed cancellation-free like `msc`.
fn branch_roots(z: C64, t: C64) -> (C64, C64) {
    let b = z - t;
    let c = C64::new(1.0, 0.0) - t * z;
    // Discriminant b² − 4c simplifies to (z+t)² − 4.
    let mut s = ((z + t) * (z + t) - C64::new(4.0, 0.0)).sqrt();
    if b.re * s.re + b.im * s.im < 0.0 {
        s = -s;
    }
    let q = b + s;
    (-q / 2.0, -2.0 * c / q)
}

/// The solution s_z(t) of s + 1/(z+s) = t that is connected to m_sc(z) at
/// t = 0, found by a 10-step homotopy in t.
///
/// At each homotopy node the closer of the two quadratic roots to the
/// previous iterate is kept; the walk starts at s = m_sc(z). Steps where the
/// roots are separated by less than 10·|t| abort with `BranchAmbiguous`.
pub fn stable_branch(z: C64, t: C64) -> Result<C64, SemicircleError> {
    let mut current = msc(z)?;
    if t == C64::new(0.0, 0.0) {
        return Ok(current);
    }
    const STEPS: usize = 10;
    for k in 1..=STEPS {
        let tk = t * (k as f64 / STEPS as f64);
        let (r1, r2) = branch_roots(z, tk);
        let separation = (r1 - r2).norm();
        if separation < 10.0 * t.norm() {
            return Err(SemicircleError::BranchAmbiguous { z, t, separation });
        }
        current = if (r1 - current).norm() <= (r2 - current).norm() {
            r1
        } else {
            r2
        };
    }
    Ok(current)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quadrature::integrate;

    fn residual(z: C64, m: C64) -> f64 {
        (m + (z + m).inv()).norm()
    }

    #[test]
    fn msc_at_z_eq_i_matches_quadratic_oracle() {
        // m² + im + 1 = 0 → m = i(√5 − 1)/2 for the Im > 0 branch.
        let m = msc(C64::new(0.0, 1.0)).unwrap();
        let oracle = C64::new(0.0, (5.0_f64.sqrt() - 1.0) / 2.0);
        assert!((m - oracle).norm() < 1e-15);
        assert!(residual(C64::new(0.0, 1.0), m) < 1e-15);
    }

    #[test]
    fn msc_at_z_eq_2i_matches_quadratic_oracle() {
        // m² + 2im + 1 = 0 → m = i(√2 − 1).
        let m = msc(C64::new(0.0, 2.0)).unwrap();
        let oracle = C64::new(0.0, 2.0_f64.sqrt() - 1.0);
        assert!((m - oracle).norm() < 1e-15);
    }

    #[test]
    fn msc_approaches_i_at_band_center() {
        let m = msc(C64::new(0.0, 1e-9)).unwrap();
        assert!((m - C64::new(0.0, 1.0)).norm() < 1e-8);
    }

    #[test]
    fn msc_rejects_lower_half_plane() {
        assert!(msc(C64::new(0.5, 0.0)).is_err());
        assert!(msc(C64::new(0.5, -1.0)).is_err());
    }

    #[test]
    fn msc_grid_residual_and_modulus_bounds() {
        // |m_sc| ≤ 1 and |z+m_sc|⁻² = |m_sc|² (exact consequence of
        // m(z+m) = −1), plus defining-equation residual ≤ 1e−13.
        for i in 0..100 {
            for j in 0..100 {
                let e = -10.0 + 20.0 * (i as f64 + 0.5) / 100.0;
                let eta = 10.0 * (j as f64 + 0.5) / 100.0;
                let z = C64::new(e, eta);
                let m = msc(z).unwrap();
                assert!(residual(z, m) < 1e-13, "residual at z = {z}");
                assert!(m.norm() <= 1.0 + 1e-12, "|m| > 1 at z = {z}");
                assert!(m.im > 0.0, "Im m ≤ 0 at z = {z}");
                let lhs = (z + m).norm_sqr().recip();
                let rhs = m.norm_sqr();
                assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0), "modulus identity at z = {z}");
            }
        }
    }

    #[test]
    fn msc_matches_quadrature_of_semicircle_transform() {
        // m_sc(z) = ∫ ρ_sc(x)/(x−z) dx, split into real and imaginary parts.
        for &(e, eta) in &[(0.0, 1.0), (1.0, 0.5), (-1.5, 2.0), (3.0, 0.7)] {
            let z = C64::new(e, eta);
            let m = msc(z).unwrap();
            let re = integrate(
                |x| rho_sc(x) * (x - e) / ((x - e) * (x - e) + eta * eta),
                -2.0,
                2.0,
                1e-10,
            )
            .unwrap()
            .0;
            let im = integrate(
                |x| rho_sc(x) * eta / ((x - e) * (x - e) + eta * eta),
                -2.0,
                2.0,
                1e-10,
            )
            .unwrap()
            .0;
            assert!((m - C64::new(re, im)).norm() < 1e-8, "z = {z}");
        }
    }

    #[test]
    fn edge_expansion_near_both_edges() {
        // Near z = ±2: m_sc − (∓1 + √(z²−4)/2) = −(z ∓ 2)/2, which is
        // O(|z²−4|); √ taken on the m_sc branch (recovered as 2m + z).
        for sign in [1.0, -1.0] {
            for k in 1..=10 {
                let z = C64::new(sign * 2.0, 0.0) + C64::new(0.003, 0.007) * (k as f64);
                let m = msc(z).unwrap();
                let s = 2.0 * m + z;
                let anchor = C64::new(-sign, 0.0) + s / 2.0;
                let lhs = (m - anchor).norm();
                let rhs = (z * z - C64::new(4.0, 0.0)).norm();
                assert!(lhs <= rhs, "expansion bound: {lhs} vs {rhs} at z = {z}");
            }
        }
    }

    #[test]
    fn rho_and_n_reference_values() {
        assert!((rho_sc(0.0) - 1.0 / PI).abs() < 1e-16);
        assert_eq!(rho_sc(2.0), 0.0);
        assert_eq!(rho_sc(-2.0), 0.0);
        assert_eq!(rho_sc(5.0), 0.0);
        assert_eq!(n_sc(-2.0), 0.0);
        assert_eq!(n_sc(2.0), 1.0);
        assert!((n_sc(0.0) - 0.5).abs() < 1e-16);
    }

    #[test]
    fn n_sc_is_the_antiderivative_of_rho_sc() {
        for k in 0..20 {
            let e = -2.0 + 4.0 * (k as f64 + 0.5) / 20.0;
            let quad = integrate(rho_sc, -2.0, e, 1e-12).unwrap().0;
            assert!((quad - n_sc(e)).abs() < 1e-10, "E = {e}");
        }
    }

    #[test]
    fn classical_locations_small_n_oracles() {
        let g2 = classical_locations(2);
        assert!(g2[0].abs() < 1e-12);
        assert!((g2[1] - 2.0).abs() < 1e-12);
        let g4 = classical_locations(4);
        assert!(g4[1].abs() < 1e-12, "γ_2 of N=4 is 0");
        let g10 = classical_locations(10);
        assert!(g10[3] < 0.0, "γ_4 of N=10 lies left of the median");
        assert!(g10[4].abs() < 1e-12, "γ_5 of N=10 is the median, i.e. 0");
        assert!(g10[5] > 0.0, "γ_6 of N=10 lies right of the median");
        assert!((n_sc(g10[6]) - 0.7).abs() < 1e-10);
        for w in g10.windows(2) {
            assert!(w[0] < w[1], "locations strictly increasing");
        }
    }

    #[test]
    fn classical_locations_satisfy_defining_equation() {
        for &n in &[2_usize, 10, 100] {
            let gamma = classical_locations(n);
            for (j, &g) in gamma.iter().enumerate() {
                let lhs = n as f64 * n_sc(g);
                assert!((lhs - (j + 1) as f64).abs() < 1e-10, "N = {n}, j = {}", j + 1);
            }
        }
    }

    #[test]
    fn control_g_worked_example() {
        // E = 0, η = 0.01, δ₊ = 1: κ = 2 and |Re m_sc² − 1| ≈ 2, so the
        // min picks √(κ+η) = √2.01.
        let g = control_g(C64::new(0.0, 0.01), 1.0).unwrap();
        assert!((g - 2.01_f64.sqrt()).abs() < 1e-12);
        assert!((g - 1.417_74).abs() < 1e-4);
    }

    #[test]
    fn control_g_bounds() {
        for i in 0..30 {
            for j in 0..30 {
                let e = -4.0 + 8.0 * i as f64 / 29.0;
                let eta = 0.05 + 3.0 * j as f64 / 29.0;
                let z = C64::new(e, eta);
                let cap = (kappa(e) + eta).sqrt();
                for &dp in &[0.1, 1.0, 2.0] {
                    let g = control_g(z, dp).unwrap();
                    assert!(g <= cap + 1e-14, "g ≤ √(κ+η)");
                    assert!(g > 0.0);
                    if dp >= 2.0 {
                        // |Re m_sc² − 1| ≤ 2 ≤ δ₊, so the inner max is δ₊
                        // and the outer min is √(κ+η) whenever κ+η ≤ δ₊².
                        if cap <= dp {
                            assert!((g - cap).abs() < 1e-14);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn control_point_records_exact_kappa() {
        let p = ControlPoint::new(1.25, 0.5, 1.0).unwrap();
        assert_eq!(p.kappa, (1.25_f64 - 2.0).abs());
        assert_eq!(p.z, C64::new(1.25, 0.5));
    }

    #[test]
    fn stable_branch_at_t_zero_is_msc() {
        let z = C64::new(0.7, 0.9);
        let s = stable_branch(z, C64::new(0.0, 0.0)).unwrap();
        assert_eq!(s, msc(z).unwrap());
    }

    #[test]
    fn stable_branch_residual_and_continuity() {
        let z = C64::new(0.0, 2.0);
        let t = C64::new(0.01, 0.0);
        let s = stable_branch(z, t).unwrap();
        let res = (s + (z + s).inv() - t).norm();
        assert!(res < 1e-12, "defining-equation residual {res}");

        // Oracle: follow both quadratic roots from t = 0 and keep the one
        // that starts at m_sc.
        let m0 = msc(z).unwrap();
        let (r1, r2) = super::branch_roots(z, t);
        let oracle = if (r1 - m0).norm() < (r2 - m0).norm() { r1 } else { r2 };
        assert!((s - oracle).norm() < 1e-12);

        // Perturbation bound |s − m_sc| ≤ C|t|/√(κ+η) with a generous C.
        let dist = (s - m0).norm();
        let cap = 10.0 * t.norm() / (kappa(z.re) + z.im).sqrt();
        assert!(dist <= cap, "dist = {dist}, cap = {cap}");
    }

    #[test]
    fn stable_branch_flags_ambiguity_near_edge() {
        // At z ≈ 2 the discriminant (z+t)²−4 nearly vanishes, so the roots
        // collide relative to 10|t| and the branch cannot be certified.
        let z = C64::new(2.0, 1e-8);
        let t = C64::new(0.05, 0.0);
        assert!(matches!(
            stable_branch(z, t),
            Err(SemicircleError::BranchAmbiguous { .. })
        ));
    }
}
