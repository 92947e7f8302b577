use alloc::collections::BTreeMap;
use core::ops::Range;

use num_bigint::BigUint;

use super::AnalysisError;
use crate::bpsolve::{solve_bp, SolverSettings};
use crate::matrix::{max_abs_diff, DenseMatrix};
use crate::rng::Rng;
use crate::support::{SignPattern, SupportSet};

/// Largest support [`face_count`] will enumerate (`2^21` solves).
pub const MAX_FACE_SUPPORT: usize = 22;

/// Which sign patterns on `I` basis pursuit recovers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceCount {
    pub support: SupportSet,
    /// `2^|I|` faces, counting a pattern and its negation separately.
    pub total: BigUint,
    /// Twice the number of recovered canonical patterns.
    pub surviving: BigUint,
    /// Canonical pattern to "recovered".
    pub per_pattern: BTreeMap<SignPattern, bool>,
}

impl FaceCount {
    fn empty(support: SupportSet) -> Self {
        let total = BigUint::from(1u32) << support.len();
        Self { support, total, surviving: BigUint::ZERO, per_pattern: BTreeMap::new() }
    }

    /// Whether every canonical pattern has been evaluated.
    pub fn is_complete(&self) -> bool {
        BigUint::from(self.per_pattern.len()) * 2u32 == self.total
    }

    /// Recovered or not, for `x₀` with the given signs (any representative).
    pub fn recovers(&self, pattern: &SignPattern) -> Option<bool> {
        self.per_pattern.get(pattern).copied()
    }

    /// Disjoint union of two partial counts on the same support.
    pub fn merge(&mut self, other: &FaceCount) -> Result<(), AnalysisError> {
        if self.support != other.support {
            return Err(AnalysisError::MergeMismatch);
        }
        for (p, &ok) in &other.per_pattern {
            if self.per_pattern.insert(p.clone(), ok).is_none() && ok {
                self.surviving += 2u32;
            }
        }
        Ok(())
    }
}

fn check(a: &DenseMatrix, support: &SupportSet) -> Result<u64, AnalysisError> {
    if support.ambient() != a.cols() {
        return Err(AnalysisError::SupportMismatch { support: support.ambient(), cols: a.cols() });
    }
    let s = support.len();
    if s > MAX_FACE_SUPPORT {
        return Err(AnalysisError::BudgetExceeded { size: s, limit: MAX_FACE_SUPPORT });
    }
    if s == 0 {
        return Err(crate::support::SupportError::EmptySupport.into());
    }
    Ok(1u64 << (s - 1))
}

/// Solves basis pursuit for `x₀ = σ` on `I` for every canonical `σ` and marks
/// the pattern recovered when `‖x* − x₀‖∞ ≤ recovery_tol`.
pub fn face_count(
    a: &DenseMatrix,
    support: &SupportSet,
    settings: &SolverSettings,
) -> Result<FaceCount, AnalysisError> {
    let n = check(a, support)?;
    face_count_range(a, support, 0..n, settings)
}

/// The patterns with canonical index in `range` (see
/// [`SignPattern::canonical_from_index`]); ranges merge with
/// [`FaceCount::merge`].
pub fn face_count_range(
    a: &DenseMatrix,
    support: &SupportSet,
    range: Range<u64>,
    settings: &SolverSettings,
) -> Result<FaceCount, AnalysisError> {
    let n = check(a, support)?;
    let mut fc = FaceCount::empty(support.clone());
    for k in range.start..range.end.min(n) {
        let pattern = SignPattern::canonical_from_index(support.clone(), k)?;
        let ok = recovered(a, support, &pattern.signs_f64(), settings)?;
        record(&mut fc, pattern, ok);
    }
    Ok(fc)
}

/// [`face_count`] with magnitudes `0.1 + |N(0,1)|` instead of 1. The
/// resulting map must equal the unit-magnitude one.
pub fn face_count_with_magnitudes(
    a: &DenseMatrix,
    support: &SupportSet,
    rng: &mut Rng,
    settings: &SolverSettings,
) -> Result<FaceCount, AnalysisError> {
    let n = check(a, support)?;
    let mut fc = FaceCount::empty(support.clone());
    for k in 0..n {
        let pattern = SignPattern::canonical_from_index(support.clone(), k)?;
        let values: alloc::vec::Vec<f64> =
            pattern.signs_f64().iter().map(|s| s * (0.1 + rng.standard_normal().abs())).collect();
        let ok = recovered(a, support, &values, settings)?;
        record(&mut fc, pattern, ok);
    }
    Ok(fc)
}

fn record(fc: &mut FaceCount, pattern: SignPattern, ok: bool) {
    if ok {
        fc.surviving += 2u32;
    }
    fc.per_pattern.insert(pattern, ok);
}

fn recovered(
    a: &DenseMatrix,
    support: &SupportSet,
    values: &[f64],
    settings: &SolverSettings,
) -> Result<bool, AnalysisError> {
    let x0 = support.scatter(values);
    let rep = solve_bp(a, &a.mul_vec(&x0), settings)?;
    Ok(max_abs_diff(&rep.x, &x0) <= settings.recovery_tol)
}
