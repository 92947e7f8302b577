use alloc::vec::Vec;

use super::MmvError;
use crate::bpsolve::Verdict;
use crate::linalg::numerical_rank;
use crate::matrix::{norm2, DenseMatrix, MatrixError};
use crate::support::DEFAULT_ZERO_TOL;

/// Checks whether `Y` certifies `X` as a sum-of-norms minimizer.
///
/// With `G = AᵀY`: every row `j` in the row support of `X` must satisfy
/// `G_j = X_j / ‖X_j‖₂` within `strict_tol`; off the support
/// `‖G_j‖₂ ≤ 1 − strict_tol` makes the certificate strict and
/// `‖G_j‖₂ ≤ 1 + strict_tol` non-strict. Uniqueness also needs the support
/// columns of `A` to be independent. For one column this is exactly
/// [`check_smv_certificate`](crate::bpsolve::check_smv_certificate).
///
/// A row whose norm is positive but no larger than the default zero
/// tolerance has no usable direction and is reported as
/// [`MmvError::AmbiguousSupport`].
pub fn check_l12_certificate(
    a: &DenseMatrix,
    x: &DenseMatrix,
    y: &DenseMatrix,
    strict_tol: f64,
) -> Result<Verdict, MmvError> {
    if x.rows() != a.cols() || y.rows() != a.rows() || x.cols() != y.cols() {
        return Err(MatrixError::DimensionMismatch("X must be n x r and Y m x r").into());
    }
    let g = a.tr_matmul(y)?;
    let mut strict = true;
    let mut support = Vec::new();
    for j in 0..x.rows() {
        let xj = x.row(j);
        let norm = norm2(xj);
        let gj = g.row(j);
        if norm > 0.0 {
            if norm <= DEFAULT_ZERO_TOL {
                return Err(MmvError::AmbiguousSupport(j));
            }
            support.push(j);
            let dev: Vec<f64> = gj.iter().zip(xj).map(|(p, q)| p - q / norm).collect();
            if norm2(&dev) > strict_tol {
                return Ok(Verdict::Invalid);
            }
        } else {
            let gn = norm2(gj);
            if gn > 1.0 + strict_tol {
                return Ok(Verdict::Invalid);
            } else if gn > 1.0 - strict_tol {
                strict = false;
            }
        }
    }
    if strict && (support.is_empty() || numerical_rank(&a.select_columns(&support)) == support.len()) {
        Ok(Verdict::UniqueOptimal)
    } else {
        Ok(Verdict::Optimal)
    }
}
