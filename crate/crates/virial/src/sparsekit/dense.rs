//! Dense ground-truth routines backed by LAPACK.
//!
//! These exist as oracles: full spectra for small operators, dense
//! eigendecompositions for test cross-checks, and the small projected
//! problems inside the Krylov solvers.

use super::{EigenPair, EigenResult, SparseOperator};
use crate::error::{Result, VirialError};
use crate::lattice::C64;
use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, Eigh, Inverse, UPLO};

/// Dense reduction is refused above this dimension.
pub const DENSE_LIMIT: usize = 4096;

/// Full spectrum by dense reduction; used as ground truth in tests.
pub fn dense_oracle(a: &SparseOperator) -> Result<EigenResult> {
    let dense = a.to_dense()?;
    let n = a.dim();
    let (values, vectors): (Vec<C64>, Array2<C64>) = if a.hermitian {
        let (vals, vecs) = dense
            .eigh(UPLO::Lower)
            .map_err(|e| VirialError::Unsupported(format!("dense eigh failed: {e}")))?;
        (vals.iter().map(|&v| C64::new(v, 0.0)).collect(), vecs)
    } else {
        let (vals, vecs) = dense
            .eig()
            .map_err(|e| VirialError::Unsupported(format!("dense eig failed: {e}")))?;
        (vals.to_vec(), vecs)
    };
    let mut pairs = Vec::with_capacity(n);
    for (k, &value) in values.iter().enumerate() {
        let vector: Vec<C64> = vectors.column(k).to_vec();
        let av = a.matvec(&vector)?;
        let vnorm = super::nrm2(&vector);
        let residual = super::nrm2(
            &av.iter().zip(&vector).map(|(u, v)| u - value * v).collect::<Vec<_>>(),
        ) / vnorm;
        pairs.push(EigenPair { value, vector, residual });
    }
    let mut out = EigenResult { pairs, iterations: 0, converged: true };
    out.sort_by_real();
    Ok(out)
}

/// Eigendecomposition of a dense Hermitian matrix (ascending values).
pub fn eigh_dense(a: &Array2<C64>) -> Result<(Vec<f64>, Array2<C64>)> {
    let (vals, vecs) = a
        .eigh(UPLO::Lower)
        .map_err(|e| VirialError::Unsupported(format!("dense eigh failed: {e}")))?;
    Ok((vals.to_vec(), vecs))
}

/// Eigenvalues/vectors of a general dense complex matrix.
pub fn eig_dense(a: &Array2<C64>) -> Result<(Vec<C64>, Array2<C64>)> {
    let (vals, vecs) =
        a.eig().map_err(|e| VirialError::Unsupported(format!("dense eig failed: {e}")))?;
    Ok((vals.to_vec(), vecs))
}

/// Eigendecomposition of a real symmetric tridiagonal matrix given by its
/// diagonal and off-diagonal; used for the Lanczos projected problem.
pub fn eig_sym_tridiagonal(alpha: &[f64], beta: &[f64]) -> Result<(Vec<f64>, Array2<f64>)> {
    let m = alpha.len();
    let mut t = Array2::<f64>::zeros((m, m));
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let (vals, vecs) = t
        .eigh(UPLO::Lower)
        .map_err(|e| VirialError::Unsupported(format!("tridiagonal eigh failed: {e}")))?;
    Ok((vals.to_vec(), vecs))
}

/// Dense inverse, for small oracle computations in tests.
pub fn inverse_dense(a: &Array2<C64>) -> Result<Array2<C64>> {
    a.inv().map_err(|e| VirialError::Unsupported(format!("dense inverse failed: {e}")))
}

/// Largest singular value of a dense matrix via the Hermitian eigenproblem of M*M.
pub fn largest_singular_value_dense(m: &Array2<C64>) -> Result<f64> {
    let mh = m.t().mapv(|z| z.conj());
    let mtm = mh.dot(m);
    let (vals, _) = eigh_dense(&mtm)?;
    Ok(vals.iter().cloned().fold(0.0, f64::max).max(0.0).sqrt())
}

/// Column of an `Array2` as a plain vector.
pub fn column_vec(a: &Array2<C64>, k: usize) -> Vec<C64> {
    a.column(k).to_vec()
}

/// Dense matrix from row-major complex data, for test construction.
pub fn from_rows(rows: &[Vec<C64>]) -> Array2<C64> {
    let n = rows.len();
    let m = rows[0].len();
    Array2::from_shape_fn((n, m), |(i, j)| rows[i][j])
}

/// Array1 helper for tests.
pub fn to_array1(v: &[C64]) -> Array1<C64> {
    Array1::from_vec(v.to_vec())
}
