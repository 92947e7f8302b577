use alloc::vec::Vec;

use super::{solve_l11, solve_l12, MmvError};
use crate::bpsolve::{check_smv_certificate, solve_bp, SolverSettings, Verdict};
use crate::instance::ProblemInstance;
use crate::matrix::{dot, max_abs_diff, DenseMatrix};
use crate::rng::Rng;
use crate::support::SupportSet;

const UNIT_TOL: f64 = 1e-12;
const CERT_TOL: f64 = 1e-6;

/// `X₀ = diag(x)` with the zero columns removed: `nnz_count` columns, each
/// with a single nonzero entry on its own row.
///
/// Every column is 1-sparse and therefore recovered by ℓ1 when the columns of
/// `A` are unit norm and pairwise non-collinear, but with more than `m`
/// nonzero rows `X₀` has rank above `m` and no dual matrix can certify it for
/// ℓ1,2. Requires `m < n` and `m + 1 ≤ nnz_count ≤ n`.
pub fn construct_diag_counterexample(
    a: &DenseMatrix,
    nnz_count: usize,
    rng: &mut Rng,
) -> Result<ProblemInstance, MmvError> {
    let (m, n) = a.shape();
    if m >= n {
        return Err(MmvError::Precondition("A must have fewer rows than columns"));
    }
    if nnz_count <= m {
        return Err(MmvError::Precondition("nnz_count must be at least m + 1"));
    }
    if nnz_count > n {
        return Err(MmvError::Precondition("nnz_count exceeds n"));
    }
    let norms = a.column_norms();
    if norms.iter().any(|v| (v - 1.0).abs() > UNIT_TOL) {
        return Err(MmvError::Precondition("columns of A must have unit norm"));
    }
    let cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    for i in 0..n {
        for j in i + 1..n {
            if dot(&cols[i], &cols[j]).abs() >= 1.0 - UNIT_TOL {
                return Err(MmvError::Precondition("columns of A must be pairwise non-collinear"));
            }
        }
    }
    let rows = rng.support(n, nnz_count);
    let mut x0 = DenseMatrix::zeros(n, nnz_count);
    for (k, &j) in rows.indices().iter().enumerate() {
        x0[(j, k)] = rng.standard_normal();
    }
    Ok(ProblemInstance::new(a.clone(), x0)?)
}

/// `γ` values tried by [`construct_l12_succeeds_l11_fails`]: 25 points,
/// logarithmically spaced from `1e-4` to `0.5`.
pub fn default_gamma_grid() -> Vec<f64> {
    let (lo, hi) = (libm::log(1e-4), libm::log(0.5));
    (0..25).map(|k| libm::exp(lo + (hi - lo) * k as f64 / 24.0)).collect()
}

/// Limits for the randomized search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    /// Gaussian draws allowed when looking for each of `s` and `f`.
    pub draws: usize,
    /// `(s, f)` pairs tried before giving up.
    pub pairs: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self { draws: 400, pairs: 4 }
    }
}

/// Builds `X₀ = [(1−γ)s, γf]` on `support` such that ℓ1,2 recovers `X₀` while
/// ℓ1,1 does not.
///
/// `s` is a Gaussian vector on the support that basis pursuit recovers with a
/// strict dual certificate, `f` one that basis pursuit does not recover. The
/// returned `γ` is the smallest grid value for which the instance verifies:
/// [`solve_l12`] recovers `X₀` within `recovery_tol` and [`solve_l11`] does
/// not.
pub fn construct_l12_succeeds_l11_fails(
    a: &DenseMatrix,
    support: &SupportSet,
    rng: &mut Rng,
    gamma_grid: &[f64],
    settings: &SolverSettings,
    budget: SearchBudget,
) -> Result<(ProblemInstance, f64), MmvError> {
    if support.is_empty() || support.ambient() != a.cols() {
        return Err(MmvError::Precondition("support must be nonempty with ambient size n"));
    }
    if support.len() >= a.rows() {
        return Err(MmvError::Precondition("support must be smaller than m"));
    }
    let mut grid: Vec<f64> = gamma_grid.iter().copied().filter(|g| *g > 0.0 && *g < 1.0).collect();
    grid.sort_by(f64::total_cmp);
    if grid.is_empty() {
        return Err(MmvError::Precondition("gamma grid needs a value in (0, 1)"));
    }
    for _ in 0..budget.pairs {
        let Some(s) = draw_until(a, support, rng, settings, budget.draws, true)? else {
            return Err(MmvError::SearchExhausted("no recoverable vector found on the support"));
        };
        let Some(f) = draw_until(a, support, rng, settings, budget.draws, false)? else {
            return Err(MmvError::SearchExhausted("no unrecoverable vector found on the support"));
        };
        for &gamma in &grid {
            let inst = mixed_instance(a, &s, &f, gamma)?;
            let l12 = solve_l12(a, &inst.b, settings)?;
            if !l12.recovers(&inst.x0, settings.recovery_tol) {
                continue;
            }
            let l11 = solve_l11(a, &inst.b, settings)?;
            if l11.recovers(&inst.x0, settings.recovery_tol) {
                continue;
            }
            return Ok((inst, gamma));
        }
    }
    Err(MmvError::SearchExhausted("no working gamma on the grid"))
}

/// The instance `[(1−γ)s, γf]` built from full-length vectors `s` and `f`.
pub(crate) fn mixed_instance(a: &DenseMatrix, s: &[f64], f: &[f64], gamma: f64) -> Result<ProblemInstance, MmvError> {
    let cols = [s.iter().map(|v| (1.0 - gamma) * v).collect::<Vec<_>>(), f.iter().map(|v| gamma * v).collect()];
    Ok(ProblemInstance::new(a.clone(), DenseMatrix::from_columns(&cols)?)?)
}

fn draw_until(
    a: &DenseMatrix,
    support: &SupportSet,
    rng: &mut Rng,
    settings: &SolverSettings,
    draws: usize,
    want_recovered: bool,
) -> Result<Option<Vec<f64>>, MmvError> {
    for _ in 0..draws {
        let x0 = support.scatter(&rng.normal_vec(support.len()));
        let b = a.mul_vec(&x0);
        let rep = solve_bp(a, &b, settings)?;
        let recovered = rep.is_optimal() && max_abs_diff(&rep.x, &x0) <= settings.recovery_tol;
        if want_recovered {
            if recovered && check_smv_certificate(a, &x0, &rep.y, CERT_TOL)? == Verdict::UniqueOptimal {
                return Ok(Some(x0));
            }
        } else if rep.is_optimal() && !recovered {
            return Ok(Some(x0));
        }
    }
    Ok(None)
}
