//! Deterministic Monte-Carlo plumbing shared by all experiments.
//!
//! Sample `s` of experiment `tag` always computes with the derived seed
//! `derive_seed(master, [DOMAIN_EXPERIMENT, tag, s])`, regardless of which
//! worker thread picks it up; results are collected in index order. Together
//! those two rules make every experiment a pure function of (config, master
//! seed) — thread counts change wall-clock time only.

use rayon::prelude::*;

use rmt_core::ensembles::{RandomMatrix, SymmetryClass};
use rmt_core::linalg::{hermitian_eigvals, symmetric_eigvals, LinalgError};
use rmt_core::numerics::rng::{derive_rng, derive_seed, DOMAIN_BOOTSTRAP, DOMAIN_EXPERIMENT};
use rmt_core::numerics::stats::resample_indices;

/// Experiment tags for seed derivation. Fixed for all time; renumbering
/// would silently change every derived stream.
pub const TAG_LOCAL_LAW: u64 = 1;
pub const TAG_SWAP: u64 = 2;
pub const TAG_TRACE_MOMENT: u64 = 3;
pub const TAG_LDP: u64 = 4;
pub const TAG_GAP: u64 = 5;

/// Number of bootstrap resamples behind every reported standard error.
pub const BOOTSTRAP_RESAMPLES: usize = 200;

/// Seed for sample `index` of the experiment `tag`.
pub fn sample_seed(master: u64, tag: u64, index: usize) -> u64 {
    derive_seed(master, &[DOMAIN_EXPERIMENT, tag, index as u64])
}

/// Map `f` over sample indices `0..samples`, in parallel on a private pool
/// of `threads` workers (sequentially for `threads <= 1`). The output is
/// always in index order.
pub fn map_samples<T, F>(threads: usize, samples: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if threads <= 1 {
        (0..samples).map(f).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("failed to build worker pool");
        pool.install(|| (0..samples).into_par_iter().map(f).collect())
    }
}

/// Ascending eigenvalues of a sampled matrix, routed through the real
/// solver when the class permits (about 2× faster than the complex path).
pub fn sorted_eigenvalues(h: &RandomMatrix) -> Result<Vec<f64>, LinalgError> {
    let vals = match h.class() {
        SymmetryClass::RealSymmetric => symmetric_eigvals(&h.real_entries())?,
        SymmetryClass::ComplexHermitian => hermitian_eigvals(h.entries())?,
    };
    Ok(vals.to_vec())
}

/// Bootstrap standard error of `stat` over `n` sample indices.
///
/// `labels` distinguishes different fits inside one experiment (say, one
/// slope per energy) so each fit draws its own resampling stream.
pub fn bootstrap_replicates<F>(master: u64, tag: u64, labels: &[u64], n: usize, stat: F) -> Vec<f64>
where
    F: Fn(&[usize]) -> f64,
{
    let mut path = vec![DOMAIN_BOOTSTRAP, tag];
    path.extend_from_slice(labels);
    let mut rng = derive_rng(master, &path);
    (0..BOOTSTRAP_RESAMPLES)
        .map(|_| {
            let idx = resample_indices(&mut rng, n);
            stat(&idx)
        })
        .collect()
}
