#![forbid(unsafe_code)]

//! Core library of the random-matrix laboratory.
//!
//! The crate provides the deterministic building blocks that the experiment
//! layer composes into seeded Monte-Carlo studies:
//!
//! - [`entrylaws`] — standardized entry distributions (mean 0, variance 1)
//!   with exact four-moment bookkeeping, subexponential tail envelopes, and
//!   the moment-matching constructions (two-Gaussian mixture, smoothed
//!   power-law mixture, Gaussian-divisible convolution).
//! - [`profiles`] — doubly stochastic variance profiles σ²_ij: constant,
//!   Sinkhorn-scaled, and periodic band profiles, with the spectral-gap
//!   parameters δ± of the variance matrix B.
//! - [`ensembles`] — sampling Hermitian / real-symmetric matrices from a
//!   (profile, law) pair with per-entry RNG substreams, and the matrix
//!   Ornstein–Uhlenbeck flow H_t = e^{−t/2}H_0 + (1−e^{−t})^{1/2}V.
//! - [`semicircle`] — closed-form semicircle analytics: m_sc, ρ_sc, n_sc,
//!   classical locations γ_j, the control function g(z), and the stable
//!   branch of s + 1/(z+s) = t.
//! - [`resolvent`] — Green's functions G = (H−z)⁻¹, minors H^(T), the K/Z
//!   quantities, exact minor identities, the self-consistent error Υ_i, and
//!   the order-5 rank-two-perturbation resolvent expansion.
//! - [`vde`] — the vector Dyson equation m_i = −1/(z + (Bm)_i): damped
//!   fixed-point solve, τ-shifted contraction certificates, and the projected
//!   Neumann-series linear solve.
//! - [`spectra`] — eigenvalue statistics: counting functions, rigidity,
//!   delocalization, smoothed correlation estimators, unfolded gaps, and the
//!   sine-kernel reference.
//! - [`numerics`] — shared numeric plumbing: splittable seeding, adaptive
//!   Gauss–Kronrod quadrature, bracketed root finding, and basic statistics
//!   (Kolmogorov–Smirnov tests, least-squares fits, bootstrap resampling).
//!
//! Everything in this crate is deterministic given explicit seeds: sampling
//! uses counter-derived substreams, never ambient entropy.

pub mod ensembles;
pub mod entrylaws;
pub mod linalg;
pub mod numerics;
pub mod profiles;
pub mod resolvent;
pub mod semicircle;
pub mod spectra;
pub mod vde;

/// Complex double-precision scalar used throughout the crate.
pub type C64 = num_complex::Complex<f64>;
