//! Single-measurement-vector machinery.
//!
//! Basis pursuit `min ‖x‖₁ s.t. Ax = b` is solved as the linear program
//! `min 1ᵀ(u+v) s.t. A(u−v) = b, u, v ≥ 0` with a homogeneous self-dual
//! Mehrotra predictor-corrector method ([`lp`]). The LP multipliers are the
//! basis-pursuit dual `max bᵀy s.t. ‖Aᵀy‖∞ ≤ 1`, which is what the KKT
//! certificates in [`certificate`] consume.

mod bp;
pub mod certificate;
pub mod lp;
mod lstsq;

use alloc::vec::Vec;

use thiserror::Error;

pub use bp::{polish_support, polish_threshold, solve_bp};
pub use certificate::{check_smv_certificate, Verdict};
pub use lp::{solve_lp, LpError, LpSolution, LpStatus};
pub use lstsq::{restricted_least_squares, LsError, RestrictedLs};

/// Tolerances shared by every solver in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    /// Relative primal feasibility, scaled by `1 + ‖b‖₂`.
    pub feas_tol: f64,
    /// Relative duality gap, scaled by `1 + ‖x‖₁`.
    pub gap_tol: f64,
    /// Interior-point iteration cap.
    pub max_iter: usize,
    /// ∞-norm distance under which a solution counts as recovered.
    pub recovery_tol: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { feas_tol: 1e-9, gap_tol: 1e-9, max_iter: 100, recovery_tol: 1e-5 }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<(), SolveError> {
        let positive = self.feas_tol > 0.0 && self.gap_tol > 0.0 && self.recovery_tol > 0.0;
        if !positive || self.recovery_tol <= self.feas_tol || self.max_iter == 0 {
            return Err(SolveError::InvalidSettings);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Optimal,
    MaxIter,
    Infeasible,
    NumericFailure,
}

/// Primal/dual pair returned by [`solve_bp`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub status: SolveStatus,
    /// `‖Ax − b‖₂`.
    pub primal_residual: f64,
    /// `|‖x‖₁ − bᵀy|`.
    pub duality_gap: f64,
    pub iterations: usize,
}

impl SolveReport {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub fn objective(&self) -> f64 {
        crate::matrix::norm1(&self.x)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("right-hand side has length {got}, expected {expected}")]
    RhsLength { expected: usize, got: usize },
    #[error("right-hand side contains a non-finite value")]
    NonFinite,
    #[error("solver settings must be positive with recovery_tol > feas_tol")]
    InvalidSettings,
}
