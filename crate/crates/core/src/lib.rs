//! Joint-sparse (MMV) recovery: basis pursuit, sum-of-norms, boosted ℓ1 and
//! ReMBo-ℓ1, together with the combinatorial recovery-rate models built on
//! face counts and orthant-intersection counts.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! experiment orchestration live in the `jsrec` companion crate.
//!
//! Module map:
//! - [`matrix`], [`support`], [`rng`]: dense matrices, supports, sign patterns
//!   and the counter-based random generator shared by everything else.
//! - [`linalg`]: Cholesky, Householder QR and Jacobi SVD on small dense
//!   matrices.
//! - [`bpsolve`]: the LP interior-point method, basis pursuit with dual
//!   extraction, restricted least squares and KKT certificates.
//! - [`mmv`]: ℓ1,1 and ℓ1,2 solvers, the ℓ1,2 certificate and the two
//!   counterexample constructors.
//! - [`combinatorics`]: `C(n, d)`, sign-pattern sampling and mutual coherence.
//! - [`analysis`]: face counting, null-space property, spark and the
//!   probability models.
//! - [`recover`]: the boosted-ℓ1 and ReMBo-ℓ1 pipelines.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod bpsolve;
pub mod combinatorics;
pub mod instance;
pub mod linalg;
pub mod matrix;
pub mod mmv;
pub mod recover;
pub mod rng;
pub mod support;

pub use bpsolve::{SolveReport, SolveStatus, SolverSettings};
pub use instance::ProblemInstance;
pub use matrix::{DenseMatrix, MatrixError};
pub use rng::Rng;
pub use support::{SignPattern, SupportError, SupportSet};
