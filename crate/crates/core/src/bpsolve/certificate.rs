//! KKT (Fuchs) certificates for basis pursuit.

use alloc::vec::Vec;

use super::SolveError;
use crate::linalg::numerical_rank;
use crate::matrix::DenseMatrix;

/// Outcome of a certificate check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    /// Strict complementarity holds and the support columns are independent.
    UniqueOptimal,
    /// Only the non-strict optimality conditions hold.
    Optimal,
    Invalid,
}

/// Checks whether `y` certifies `x` as a basis-pursuit minimizer of `A x = b`.
///
/// With `g = Aᵀy`: on the support `g_j` must equal `sign(x_j)` within
/// `strict_tol`; off the support `|g_j| ≤ 1 − strict_tol` gives a strict
/// certificate and `|g_j| ≤ 1 + strict_tol` a non-strict one. Uniqueness also
/// needs `A_support` to have full column rank. The support is the set of
/// exactly nonzero entries of `x`; `Ax = b` is the caller's responsibility.
pub fn check_smv_certificate(a: &DenseMatrix, x: &[f64], y: &[f64], strict_tol: f64) -> Result<Verdict, SolveError> {
    if x.len() != a.cols() {
        return Err(SolveError::RhsLength { expected: a.cols(), got: x.len() });
    }
    if y.len() != a.rows() {
        return Err(SolveError::RhsLength { expected: a.rows(), got: y.len() });
    }
    let g = a.tr_mul_vec(y);
    let mut strict = true;
    let mut support = Vec::new();
    for (j, (&xj, &gj)) in x.iter().zip(&g).enumerate() {
        if xj != 0.0 {
            support.push(j);
            if (gj - xj.signum()).abs() > strict_tol {
                return Ok(Verdict::Invalid);
            }
        } else if gj.abs() > 1.0 + strict_tol {
            return Ok(Verdict::Invalid);
        } else if gj.abs() > 1.0 - strict_tol {
            strict = false;
        }
    }
    if strict && (support.is_empty() || numerical_rank(&a.select_columns(&support)) == support.len()) {
        Ok(Verdict::UniqueOptimal)
    } else {
        Ok(Verdict::Optimal)
    }
}
