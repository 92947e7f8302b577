//! Multiple-measurement-vector solvers.
//!
//! `min ‖X‖₁,₁ s.t. AX = B` decouples into one basis pursuit per column
//! ([`solve_l11`]). The sum-of-row-norms problem `min ‖X‖₁,₂ s.t. AX = B`
//! couples the columns and is solved by an alternating-direction splitting
//! ([`solve_l12`]); its dual is `max tr(BᵀY) s.t. ‖AᵀY‖∞,₂ ≤ 1`.

mod certificate;
mod construct;
mod l12;

use alloc::vec::Vec;

use thiserror::Error;

use crate::bpsolve::{solve_bp, SolveError, SolveStatus, SolverSettings};
use crate::matrix::{DenseMatrix, MatrixError};

pub use certificate::check_l12_certificate;
pub use construct::{
    construct_diag_counterexample, construct_l12_succeeds_l11_fails, default_gamma_grid, SearchBudget,
};
pub use l12::{solve_l12, solve_l12_with, AdmmSettings};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MmvError {
    #[error("column {column}: {source}")]
    Column { column: usize, source: SolveError },
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("row {0} has a nonzero norm at or below the zero tolerance")]
    AmbiguousSupport(usize),
    #[error("precondition violated: {0}")]
    Precondition(&'static str),
    #[error("search exhausted: {0}")]
    SearchExhausted(&'static str),
}

/// Primal/dual pair for an MMV problem.
#[derive(Debug, Clone, PartialEq)]
pub struct MmvSolveReport {
    /// `n x r` primal solution.
    pub x: DenseMatrix,
    /// `m x r` dual solution.
    pub y: DenseMatrix,
    pub status: SolveStatus,
    /// `‖AX − B‖_F`.
    pub primal_residual: f64,
    /// Objective minus dual objective, in absolute value.
    pub gap: f64,
    pub iterations: usize,
}

impl MmvSolveReport {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// True when `max |X − X₀| ≤ tol` entrywise.
    pub fn recovers(&self, x0: &DenseMatrix, tol: f64) -> bool {
        self.x.max_abs_diff(x0).is_some_and(|d| d <= tol)
    }
}

/// Column-by-column basis pursuit.
///
/// The status is `Optimal` only if every column is; otherwise it is the
/// status of the first column that is not.
pub fn solve_l11(a: &DenseMatrix, b: &DenseMatrix, settings: &SolverSettings) -> Result<MmvSolveReport, MmvError> {
    if b.rows() != a.rows() {
        return Err(MatrixError::DimensionMismatch("B must have as many rows as A").into());
    }
    let mut xs = Vec::with_capacity(b.cols());
    let mut ys = Vec::with_capacity(b.cols());
    let mut status = SolveStatus::Optimal;
    let mut iterations = 0;
    for k in 0..b.cols() {
        let rep = solve_bp(a, &b.column(k), settings).map_err(|source| MmvError::Column { column: k, source })?;
        if status == SolveStatus::Optimal && rep.status != SolveStatus::Optimal {
            status = rep.status;
        }
        iterations += rep.iterations;
        xs.push(rep.x);
        ys.push(rep.y);
    }
    let x = DenseMatrix::from_columns(&xs)?;
    let y = DenseMatrix::from_columns(&ys)?;
    let primal_residual = a.matmul(&x)?.sub(b)?.frobenius_norm();
    let gap = (x.norm_l11() - trace_tr_product(b, &y)).abs();
    Ok(MmvSolveReport { x, y, status, primal_residual, gap, iterations })
}

/// `tr(BᵀY)` for equally shaped `B` and `Y`.
pub(crate) fn trace_tr_product(b: &DenseMatrix, y: &DenseMatrix) -> f64 {
    b.as_slice().iter().zip(y.as_slice()).map(|(p, q)| p * q).sum()
}
