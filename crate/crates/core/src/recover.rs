//! Sequential single-vector recovery of joint-sparse `X₀` from `B = AX₀`.
//!
//! Both pipelines reduce the MMV problem to basis pursuit on one vector
//! `b = Bw`, read off a sparse support `I` from the solution and accept it if
//! `min ‖A_I X̄ − B‖_F` vanishes. Boosted ℓ1 uses the columns of `B` in turn
//! (`w = e_k`); ReMBo-ℓ1 draws random weights until it succeeds or runs out
//! of iterations.

use alloc::vec::Vec;

use thiserror::Error;

use crate::analysis::FaceCount;
use crate::bpsolve::{polish_support, restricted_least_squares, solve_bp, SolveStatus, SolverSettings};
use crate::matrix::{dot, DenseMatrix, MatrixError};
use crate::rng::Rng;
use crate::support::{sign_pattern_of, SupportSet, DEFAULT_ZERO_TOL};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecoverError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("at least one iteration is required")]
    NoIterations,
    #[error("face count support does not match X0")]
    SupportMismatch,
}

/// Knobs shared by both pipelines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineSettings {
    pub solver: SolverSettings,
    /// Accept `I` when `‖A_I X̄ − B‖_F ≤ res_tol·(1 + ‖B‖_F)`.
    pub res_tol: f64,
    /// Largest admissible support; `None` uses [`support_threshold`].
    pub threshold_override: Option<usize>,
    /// Keep every weight vector in [`PipelineReport::weight_log`].
    pub keep_weights: bool,
}

impl Default for PipelineSettings {
    fn default() -> Self {
        Self { solver: SolverSettings::default(), res_tol: 1e-8, threshold_override: None, keep_weights: false }
    }
}

/// Largest support size that passes the sparsity test `2|I| < m + 1`, i.e.
/// `|I|` below half the spark of a matrix in general position. An override
/// replaces the computed value.
pub fn support_threshold(m: usize, override_size: Option<usize>) -> usize {
    override_size.unwrap_or(m / 2)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Recovered { x: DenseMatrix, support: SupportSet },
    Failure,
}

/// Diagnostics of one basis-pursuit attempt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationDiag {
    /// Support size after polishing; `None` when the solve itself failed.
    pub support_size: Option<usize>,
    /// Restricted least-squares residual, or infinity when it was not
    /// computed.
    pub residual: f64,
    pub status: Option<SolveStatus>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineReport {
    pub outcome: Outcome,
    /// Attempts made, including the successful one.
    pub iterations_used: usize,
    pub weight_log: Option<Vec<Vec<f64>>>,
    pub per_iteration: Vec<IterationDiag>,
}

impl PipelineReport {
    pub fn is_recovered(&self) -> bool {
        matches!(self.outcome, Outcome::Recovered { .. })
    }

    /// 1-based iteration at which recovery happened.
    pub fn success_iteration(&self) -> Option<usize> {
        self.is_recovered().then_some(self.iterations_used)
    }

    pub fn x(&self) -> Option<&DenseMatrix> {
        match &self.outcome {
            Outcome::Recovered { x, .. } => Some(x),
            Outcome::Failure => None,
        }
    }
}

/// Source of the weight vectors `w` in `b = Bw`.
pub trait WeightSource {
    fn next_weights(&mut self, r: usize) -> Vec<f64>;
}

/// I.i.d. standard normal weights.
impl WeightSource for Rng {
    fn next_weights(&mut self, r: usize) -> Vec<f64> {
        self.normal_vec(r)
    }
}

/// A fixed sequence of weights, repeated cyclically.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedWeights {
    seq: Vec<Vec<f64>>,
    pos: usize,
}

impl FixedWeights {
    /// # Panics
    /// If `seq` is empty.
    pub fn new(seq: Vec<Vec<f64>>) -> Self {
        assert!(!seq.is_empty(), "weight sequence must be nonempty");
        Self { seq, pos: 0 }
    }

    /// `e₁, …, e_r`.
    pub fn unit_vectors(r: usize) -> Self {
        Self::new(
            (0..r)
                .map(|k| {
                    let mut e = alloc::vec![0.0; r];
                    e[k] = 1.0;
                    e
                })
                .collect(),
        )
    }
}

impl WeightSource for FixedWeights {
    fn next_weights(&mut self, r: usize) -> Vec<f64> {
        let w = self.seq[self.pos % self.seq.len()].clone();
        assert_eq!(w.len(), r, "weight length must equal the number of columns of B");
        self.pos += 1;
        w
    }
}

struct Attempt {
    diag: IterationDiag,
    found: Option<(DenseMatrix, SupportSet)>,
}

fn attempt(
    a: &DenseMatrix,
    b: &DenseMatrix,
    rhs: &[f64],
    settings: &PipelineSettings,
) -> Result<Attempt, RecoverError> {
    let bnorm = b.frobenius_norm();
    let bound = settings.res_tol * (1.0 + bnorm);
    let threshold = support_threshold(a.rows(), settings.threshold_override);
    let rep = match solve_bp(a, rhs, &settings.solver) {
        Ok(rep) if rep.status != SolveStatus::Infeasible => rep,
        Ok(rep) => {
            let diag = IterationDiag { support_size: None, residual: f64::INFINITY, status: Some(rep.status) };
            return Ok(Attempt { diag, found: None });
        }
        Err(_) => {
            let diag = IterationDiag { support_size: None, residual: f64::INFINITY, status: None };
            return Ok(Attempt { diag, found: None });
        }
    };
    let support = polish_support(&rep.x, &settings.solver);
    let mut diag =
        IterationDiag { support_size: Some(support.len()), residual: f64::INFINITY, status: Some(rep.status) };
    if support.len() > threshold {
        return Ok(Attempt { diag, found: None });
    }
    if support.is_empty() {
        diag.residual = bnorm;
        let found = (bnorm <= bound).then(|| (DenseMatrix::zeros(a.cols(), b.cols()), support));
        return Ok(Attempt { diag, found });
    }
    let ls = restricted_least_squares(a, &support, b).map_err(|e| match e {
        crate::bpsolve::LsError::Matrix(m) => RecoverError::Matrix(m),
        _ => RecoverError::Matrix(MatrixError::DimensionMismatch("support does not fit A")),
    })?;
    diag.residual = ls.residual;
    let found = (ls.residual <= bound).then(|| (ls.scatter(&support), support));
    Ok(Attempt { diag, found })
}

fn check_shapes(a: &DenseMatrix, b: &DenseMatrix) -> Result<(), RecoverError> {
    if a.rows() != b.rows() {
        return Err(MatrixError::DimensionMismatch("B must have as many rows as A").into());
    }
    Ok(())
}

/// Basis pursuit on columns `1..r` of `B` in order; the first column whose
/// support is sparse enough and explains all of `B` wins.
pub fn boosted_l1(
    a: &DenseMatrix,
    b: &DenseMatrix,
    settings: &PipelineSettings,
) -> Result<PipelineReport, RecoverError> {
    check_shapes(a, b)?;
    let mut per_iteration = Vec::with_capacity(b.cols());
    for k in 0..b.cols() {
        let att = attempt(a, b, &b.column(k), settings)?;
        per_iteration.push(att.diag);
        if let Some((x, support)) = att.found {
            return Ok(finish(a, b, settings, Outcome::Recovered { x, support }, k + 1, None, per_iteration));
        }
    }
    Ok(finish(a, b, settings, Outcome::Failure, b.cols(), None, per_iteration))
}

/// ReMBo-ℓ1 with i.i.d. standard normal weights drawn from `rng`.
pub fn rembo_l1(
    a: &DenseMatrix,
    b: &DenseMatrix,
    max_iterations: usize,
    rng: &mut Rng,
    settings: &PipelineSettings,
) -> Result<PipelineReport, RecoverError> {
    rembo_l1_with(a, b, max_iterations, rng, settings)
}

/// ReMBo-ℓ1 with an arbitrary weight source: up to `max_iterations` times,
/// solve basis pursuit on `Bw` and apply the boosted-ℓ1 acceptance test.
pub fn rembo_l1_with<W: WeightSource + ?Sized>(
    a: &DenseMatrix,
    b: &DenseMatrix,
    max_iterations: usize,
    weights: &mut W,
    settings: &PipelineSettings,
) -> Result<PipelineReport, RecoverError> {
    check_shapes(a, b)?;
    if max_iterations == 0 {
        return Err(RecoverError::NoIterations);
    }
    let mut log = settings.keep_weights.then(Vec::new);
    let mut per_iteration = Vec::new();
    for it in 0..max_iterations {
        let w = weights.next_weights(b.cols());
        let rhs = b.mul_vec(&w);
        if let Some(log) = log.as_mut() {
            log.push(w);
        }
        let att = attempt(a, b, &rhs, settings)?;
        per_iteration.push(att.diag);
        if let Some((x, support)) = att.found {
            return Ok(finish(a, b, settings, Outcome::Recovered { x, support }, it + 1, log, per_iteration));
        }
    }
    Ok(finish(a, b, settings, Outcome::Failure, max_iterations, log, per_iteration))
}

fn finish(
    a: &DenseMatrix,
    b: &DenseMatrix,
    settings: &PipelineSettings,
    outcome: Outcome,
    iterations_used: usize,
    weight_log: Option<Vec<Vec<f64>>>,
    per_iteration: Vec<IterationDiag>,
) -> PipelineReport {
    if let Outcome::Recovered { x, support } = &outcome {
        debug_assert!(support.len() <= support_threshold(a.rows(), settings.threshold_override));
        debug_assert!(a
            .matmul(x)
            .and_then(|ax| ax.sub(b))
            .is_ok_and(|r| { r.frobenius_norm() <= settings.res_tol * (1.0 + b.frobenius_norm()) }));
    }
    PipelineReport { outcome, iterations_used, weight_log, per_iteration }
}

/// Outcome of a pipeline decided from a face count instead of solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CachedDecision {
    pub recovered: bool,
    pub iterations_used: usize,
}

/// Boosted ℓ1 decided from `fc`: column `k` is recovered exactly when the
/// sign pattern of `X₀[:, k]` on the support survives. Requires the row
/// support of `X₀` to equal the face-count support and to pass the sparsity
/// test.
pub fn boosted_l1_cached(fc: &FaceCount, x0: &DenseMatrix, threshold: usize) -> Result<CachedDecision, RecoverError> {
    check_cache(fc, x0)?;
    for k in 0..x0.cols() {
        if column_survives(fc, &x0.column(k), threshold) {
            return Ok(CachedDecision { recovered: true, iterations_used: k + 1 });
        }
    }
    Ok(CachedDecision { recovered: false, iterations_used: x0.cols() })
}

/// ℓ1,1 decided from `fc`: every column must be recovered.
pub fn l11_cached(fc: &FaceCount, x0: &DenseMatrix) -> Result<bool, RecoverError> {
    check_cache(fc, x0)?;
    Ok((0..x0.cols()).all(|k| column_survives(fc, &x0.column(k), usize::MAX)))
}

/// ReMBo-ℓ1 decided from `fc`, using the sign pattern of `X₀w`.
pub fn rembo_l1_cached<W: WeightSource + ?Sized>(
    fc: &FaceCount,
    x0: &DenseMatrix,
    max_iterations: usize,
    weights: &mut W,
    threshold: usize,
) -> Result<CachedDecision, RecoverError> {
    check_cache(fc, x0)?;
    if max_iterations == 0 {
        return Err(RecoverError::NoIterations);
    }
    for it in 0..max_iterations {
        let w = weights.next_weights(x0.cols());
        let v: Vec<f64> = (0..x0.rows()).map(|j| dot(x0.row(j), &w)).collect();
        if column_survives(fc, &v, threshold) {
            return Ok(CachedDecision { recovered: true, iterations_used: it + 1 });
        }
    }
    Ok(CachedDecision { recovered: false, iterations_used: max_iterations })
}

fn check_cache(fc: &FaceCount, x0: &DenseMatrix) -> Result<(), RecoverError> {
    if fc.support.ambient() != x0.rows() || SupportSet::row_support(x0, 0.0) != fc.support {
        return Err(RecoverError::SupportMismatch);
    }
    Ok(())
}

/// A vector whose support is smaller than the face-count support (some
/// entries cancel) is not covered by the cache and counts as unrecovered.
fn column_survives(fc: &FaceCount, v: &[f64], threshold: usize) -> bool {
    if fc.support.len() > threshold {
        return false;
    }
    match sign_pattern_of(v, &fc.support, DEFAULT_ZERO_TOL) {
        Ok(p) => fc.recovers(&p).unwrap_or(false),
        Err(_) => false,
    }
}
