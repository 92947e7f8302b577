use alloc::vec::Vec;

use thiserror::Error;

use crate::linalg::{Qr, Svd};
use crate::matrix::{DenseMatrix, MatrixError};
use crate::support::SupportSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LsError {
    #[error("support is empty")]
    EmptySupport,
    #[error("support has ambient size {support}, matrix has {cols} columns")]
    SupportMismatch { support: usize, cols: usize },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Result of `min ‖A_I X̄ − B‖_F`.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedLs {
    /// `|I| x r` minimizer (minimum-norm when `A_I` is rank deficient).
    pub xbar: DenseMatrix,
    /// `‖A_I X̄ − B‖_F`.
    pub residual: f64,
    /// Set when the numerical rank of `A_I` is below `|I|`.
    pub rank_deficient: bool,
}

impl RestrictedLs {
    /// Embeds `X̄` into an `n x r` matrix, zero outside the support.
    pub fn scatter(&self, support: &SupportSet) -> DenseMatrix {
        let mut x = DenseMatrix::zeros(support.ambient(), self.xbar.cols());
        for (k, &j) in support.indices().iter().enumerate() {
            x.row_mut(j).copy_from_slice(self.xbar.row(k));
        }
        x
    }
}

/// Least squares restricted to the columns `I` of `A`, via Householder QR of
/// `A_I`. Rank-deficient `A_I` falls back to the SVD pseudo-inverse and sets
/// the `rank_deficient` flag.
pub fn restricted_least_squares(
    a: &DenseMatrix,
    support: &SupportSet,
    b: &DenseMatrix,
) -> Result<RestrictedLs, LsError> {
    if support.is_empty() {
        return Err(LsError::EmptySupport);
    }
    if support.ambient() != a.cols() {
        return Err(LsError::SupportMismatch { support: support.ambient(), cols: a.cols() });
    }
    if b.rows() != a.rows() {
        return Err(MatrixError::DimensionMismatch("B must have as many rows as A").into());
    }
    let ai = a.select_columns(support.indices());
    let k = support.len();
    let svd = Svd::new(&ai);
    let rank_deficient = svd.rank() < k;
    let qr = if rank_deficient { None } else { Qr::new(&ai).ok() };
    let cols: Vec<Vec<f64>> = (0..b.cols())
        .map(|c| {
            let bc = b.column(c);
            match &qr {
                Some(qr) => qr.solve_ls(&bc),
                None => svd.solve_min_norm(&bc),
            }
        })
        .collect();
    let xbar = DenseMatrix::from_columns(&cols)?;
    let residual = ai.matmul(&xbar)?.sub(b)?.frobenius_norm();
    Ok(RestrictedLs { xbar, residual, rank_deficient })
}
