//! Recovery theory on a fixed support: face counts, the null-space property,
//! spark and the probability models built on them.
//!
//! Basis pursuit recovers `x₀` supported on `I` exactly when the face of the
//! cross-polytope selected by the signs of `x₀` survives projection by `A`, so
//! recovery depends on `sign(x₀)` alone. [`face_count`] enumerates the
//! `2^(|I|−1)` canonical sign patterns, solves one basis pursuit for each and
//! records which survive. [`check_nsp_uniform`] decides the same "all patterns
//! survive" question through the null space of `A`.

mod face;
mod models;
mod nsp;
mod spark;

use thiserror::Error;

use crate::bpsolve::{LpError, SolveError};
use crate::matrix::MatrixError;
use crate::support::SupportError;

pub use face::{face_count, face_count_range, face_count_with_magnitudes, FaceCount, MAX_FACE_SUPPORT};
pub use models::{big_to_f64, prob_boosted, prob_l1, prob_l11, prob_rembo, rembo_model, RemboModel};
pub use nsp::{check_nsp_uniform, NspOutcome, NSP_TOL};
pub use spark::{spark_bruteforce, Spark};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("support of size {size} exceeds the enumeration budget of {limit}")]
    BudgetExceeded { size: usize, limit: usize },
    #[error("support ambient size {support} does not match the {cols} columns of A")]
    SupportMismatch { support: usize, cols: usize },
    #[error("face counts over different supports cannot be merged")]
    MergeMismatch,
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Support(#[from] SupportError),
}
