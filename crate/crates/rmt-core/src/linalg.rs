//! Thin wrappers over the LAPACK-backed dense eigensolvers and inverses.
//!
//! Everything downstream funnels through these few entry points so error
//! handling and conventions (ascending eigenvalues, lower-triangle storage)
//! are fixed in one place.

use crate::C64;
use ndarray::{Array1, Array2};
use ndarray_linalg::{EigValsh, Eigh, Inverse, UPLO};
use std::fmt;

/// Errors surfaced from dense linear algebra.
#[derive(Debug, Clone, PartialEq)]
pub enum LinalgError {
    /// The underlying LAPACK routine failed to converge or rejected input.
    EigFailure(String),
    /// Matrix inversion failed (singular or ill-formed input).
    SingularMatrix(String),
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::EigFailure(msg) => write!(f, "eigendecomposition failed: {msg}"),
            LinalgError::SingularMatrix(msg) => write!(f, "matrix inversion failed: {msg}"),
        }
    }
}

impl std::error::Error for LinalgError {}

/// Eigenvalues and orthonormal eigenvectors of a real symmetric matrix,
/// ascending; column k of the returned matrix is the k-th eigenvector.
pub fn symmetric_eigh(a: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>), LinalgError> {
    a.eigh(UPLO::Lower).map_err(|e| LinalgError::EigFailure(e.to_string()))
}

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn symmetric_eigvals(a: &Array2<f64>) -> Result<Array1<f64>, LinalgError> {
    a.eigvalsh(UPLO::Lower).map_err(|e| LinalgError::EigFailure(e.to_string()))
}

/// Eigenvalues and orthonormal eigenvectors of a complex Hermitian matrix,
/// ascending; column k of the returned matrix is the k-th eigenvector, so
/// A = U diag(λ) U†.
pub fn hermitian_eigh(a: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>), LinalgError> {
    let (vals, vecs) = a
        .eigh(UPLO::Lower)
        .map_err(|e| LinalgError::EigFailure(e.to_string()))?;
    // The LAPACK call reads the row-major buffer as its column-major
    // transpose — conj(A) for Hermitian input — so the columns it returns
    // are eigenvectors of conj(A). Conjugating restores eigenvectors of A;
    // the (real) eigenvalues are unaffected.
    Ok((vals, vecs.mapv(|c| c.conj())))
}

/// Eigenvalues of a complex Hermitian matrix, ascending.
pub fn hermitian_eigvals(a: &Array2<C64>) -> Result<Array1<f64>, LinalgError> {
    a.eigvalsh(UPLO::Lower).map_err(|e| LinalgError::EigFailure(e.to_string()))
}

/// Dense inverse of a complex square matrix.
pub fn complex_inverse(a: &Array2<C64>) -> Result<Array2<C64>, LinalgError> {
    a.inv().map_err(|e| LinalgError::SingularMatrix(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn symmetric_eigh_orders_ascending() {
        let a = array![[3.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]];
        let (vals, vecs) = symmetric_eigh(&a).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-14);
        assert!((vals[1] - 2.0).abs() < 1e-14);
        assert!((vals[2] - 3.0).abs() < 1e-14);
        // Eigenvector for eigenvalue 1 is e_1 up to sign.
        assert!((vecs[(1, 0)].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn symmetric_eigh_reconstructs_matrix() {
        let a = array![[2.0, 1.0], [1.0, 2.0]];
        let (vals, vecs) = symmetric_eigh(&a).unwrap();
        // A = V diag(λ) Vᵀ.
        let mut rebuilt = Array2::<f64>::zeros((2, 2));
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    rebuilt[(i, j)] += vals[k] * vecs[(i, k)] * vecs[(j, k)];
                }
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                assert!((rebuilt[(i, j)] - a[(i, j)]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn hermitian_eigh_known_spectrum() {
        // [[0, i], [−i, 0]] has eigenvalues ∓1.
        let a = array![
            [C64::new(0.0, 0.0), C64::new(0.0, 1.0)],
            [C64::new(0.0, -1.0), C64::new(0.0, 0.0)]
        ];
        let (vals, _) = hermitian_eigh(&a).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14);
        assert!((vals[1] - 1.0).abs() < 1e-14);
        let only = hermitian_eigvals(&a).unwrap();
        assert!((only[0] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn hermitian_eigh_columns_satisfy_the_eigen_equation() {
        // A genuinely complex Hermitian matrix catches any conjugation or
        // transposition slip in the eigenvector convention.
        let a = array![
            [C64::new(1.0, 0.0), C64::new(0.3, 0.7), C64::new(0.0, -0.2)],
            [C64::new(0.3, -0.7), C64::new(-0.5, 0.0), C64::new(1.1, 0.4)],
            [C64::new(0.0, 0.2), C64::new(1.1, -0.4), C64::new(0.2, 0.0)]
        ];
        let (vals, vecs) = hermitian_eigh(&a).unwrap();
        let mut worst = 0.0_f64;
        for k in 0..3 {
            for i in 0..3 {
                let mut av = C64::new(0.0, 0.0);
                for j in 0..3 {
                    av += a[(i, j)] * vecs[(j, k)];
                }
                worst = worst.max((av - vals[k] * vecs[(i, k)]).norm());
            }
        }
        assert!(worst < 1e-13, "eigen equation residual {worst:e}");
        // Columns are orthonormal: U†U = I.
        for p in 0..3 {
            for q in 0..3 {
                let dot: C64 = (0..3).map(|i| vecs[(i, p)].conj() * vecs[(i, q)]).sum();
                let target = if p == q { 1.0 } else { 0.0 };
                assert!((dot - C64::new(target, 0.0)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn complex_inverse_known_matrix() {
        let a = array![
            [C64::new(1.0, 0.0), C64::new(0.0, 1.0)],
            [C64::new(0.0, 0.0), C64::new(2.0, 0.0)]
        ];
        let inv = complex_inverse(&a).unwrap();
        // Upper triangular inverse: [[1, −i/2], [0, 1/2]].
        assert!((inv[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-14);
        assert!((inv[(0, 1)] - C64::new(0.0, -0.5)).norm() < 1e-14);
        assert!((inv[(1, 1)] - C64::new(0.5, 0.0)).norm() < 1e-14);
    }
}
