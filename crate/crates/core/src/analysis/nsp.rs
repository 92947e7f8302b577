use alloc::vec;
use alloc::vec::Vec;

use super::AnalysisError;
use crate::bpsolve::{solve_lp, SolverSettings};
use crate::linalg::{Qr, Svd};
use crate::matrix::{norm1, DenseMatrix};
use crate::support::{SignPattern, SupportSet};

/// Optima at or above `1 − NSP_TOL` count as violations.
pub const NSP_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub enum NspOutcome {
    /// `‖z_I‖₁ < ‖z_{Iᶜ}‖₁` for every nonzero `z` in the kernel of `A`.
    Holds,
    /// A kernel vector with `‖z_I‖₁ ≥ ‖z_{Iᶜ}‖₁` (up to [`NSP_TOL`]).
    Fails(Vec<f64>),
}

impl NspOutcome {
    pub fn holds(&self) -> bool {
        matches!(self, NspOutcome::Holds)
    }
}

/// Null-space property of `A` on `I`, equivalent to basis pursuit recovering
/// every vector supported on `I`.
///
/// For each canonical sign vector `σ` on `I` the LP
/// `max σᵀz_I s.t. Az = 0, ‖z_{Iᶜ}‖₁ ≤ 1` is solved after eliminating
/// `z_I = −A_I⁺ A_{Iᶜ} z_{Iᶜ}`, which is exact on the constraint
/// `A_{Iᶜ} z_{Iᶜ} ∈ range(A_I)`. The property fails when some optimum reaches
/// `1 − NSP_TOL`. If `A_I` itself has a kernel the property fails with a
/// witness supported on `I`.
pub fn check_nsp_uniform(
    a: &DenseMatrix,
    support: &SupportSet,
    settings: &SolverSettings,
) -> Result<NspOutcome, AnalysisError> {
    let (m, n) = a.shape();
    if support.ambient() != n {
        return Err(AnalysisError::SupportMismatch { support: support.ambient(), cols: n });
    }
    let k = support.len();
    if k > super::MAX_FACE_SUPPORT {
        return Err(AnalysisError::BudgetExceeded { size: k, limit: super::MAX_FACE_SUPPORT });
    }
    if Svd::new(a).rank() == n || k == 0 {
        return Ok(NspOutcome::Holds);
    }
    let a_i = a.select_columns(support.indices());
    if let Some(z_i) = kernel_vector(&a_i) {
        return Ok(NspOutcome::Fails(support.scatter(&z_i)));
    }
    let comp = support.complement();
    let a_c = a.select_columns(&comp);
    let qr = Qr::new(&a_i).map_err(|_| crate::matrix::MatrixError::DimensionMismatch("A_I must be tall"))?;
    // P = A_I⁺ A_c, column by column
    let p_cols: Vec<Vec<f64>> = (0..comp.len()).map(|j| qr.solve_ls(&a_c.column(j))).collect();
    let p = DenseMatrix::from_columns(&p_cols)?;

    // equality rows: Wᵀ A_c (u − v) = 0, then 1ᵀu + 1ᵀv + t = 1
    let nc = comp.len();
    let w_rows = match qr.complement_basis() {
        Some(w) => w.tr_matmul(&a_c)?,
        None => DenseMatrix::zeros(1, nc),
    };
    let extra = if m > k { w_rows.rows() } else { 0 };
    let mut a_eq = DenseMatrix::zeros(extra + 1, 2 * nc + 1);
    for i in 0..extra {
        for j in 0..nc {
            a_eq[(i, j)] = w_rows[(i, j)];
            a_eq[(i, nc + j)] = -w_rows[(i, j)];
        }
    }
    a_eq.row_mut(extra).iter_mut().for_each(|v| *v = 1.0);
    let mut b_eq = vec![0.0; extra + 1];
    b_eq[extra] = 1.0;
    let lower = vec![0.0; 2 * nc + 1];

    for idx in 0..(1u64 << (k - 1)) {
        let sigma = SignPattern::canonical_from_index(support.clone(), idx)?.signs_f64();
        // objective σᵀz_I = gᵀz_c with g = −Pᵀσ; the LP minimizes −gᵀ(u − v)
        let g: Vec<f64> = p.tr_mul_vec(&sigma).iter().map(|v| -v).collect();
        let mut c = vec![0.0; 2 * nc + 1];
        for j in 0..nc {
            c[j] = -g[j];
            c[nc + j] = g[j];
        }
        let sol = solve_lp(&c, &a_eq, &b_eq, &lower, settings)?;
        if -sol.objective >= 1.0 - NSP_TOL {
            let z_c: Vec<f64> = (0..nc).map(|j| sol.x[j] - sol.x[nc + j]).collect();
            let z_i: Vec<f64> = p.mul_vec(&z_c).iter().map(|v| -v).collect();
            let mut z = vec![0.0; n];
            for (&j, v) in support.indices().iter().zip(&z_i) {
                z[j] = *v;
            }
            for (&j, v) in comp.iter().zip(&z_c) {
                z[j] = *v;
            }
            let scale = norm1(&z_c).max(f64::MIN_POSITIVE);
            z.iter_mut().for_each(|v| *v /= scale);
            return Ok(NspOutcome::Fails(z));
        }
    }
    Ok(NspOutcome::Holds)
}

/// A unit vector in the kernel of `m`, if its columns are dependent.
fn kernel_vector(m: &DenseMatrix) -> Option<Vec<f64>> {
    let k = m.cols();
    if k <= m.rows() && Svd::new(m).rank() == k {
        return None;
    }
    let gram = m.tr_matmul(m).ok()?;
    let svd = Svd::new(&gram);
    Some(svd.v.column(k - 1))
}
