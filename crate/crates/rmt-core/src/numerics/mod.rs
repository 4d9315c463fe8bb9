//! Shared numeric plumbing: deterministic seeding, quadrature, root finding,
//! and small-sample statistics.
//!
//! These helpers are deliberately boring: every routine is pure, seeded
//! explicitly where randomness is involved, and tested against closed-form
//! oracles. The heavier linear algebra lives in [`crate::linalg`].

pub mod quadrature;
pub mod rng;
pub mod roots;
pub mod stats;
