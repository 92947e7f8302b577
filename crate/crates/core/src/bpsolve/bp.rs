use alloc::vec;
use alloc::vec::Vec;

use super::lp::{solve_lp, LpError, LpStatus};
use super::{SolveError, SolveReport, SolveStatus, SolverSettings};
use crate::linalg::{Cholesky, Qr, Svd};
use crate::matrix::{dot, norm1, norm2, norm_inf, DenseMatrix};
use crate::support::SupportSet;

/// Basis pursuit `min ‖x‖₁ s.t. Ax = b` with its dual `max bᵀy s.t. ‖Aᵀy‖∞ ≤ 1`.
///
/// The interior-point iterate is polished: entries at or below the support
/// threshold (see [`polish_support`]) are zeroed and the survivors are
/// re-fitted by least squares. The polished pair is kept only when it stays
/// feasible, keeps the signs and does not increase the objective.
pub fn solve_bp(a: &DenseMatrix, b: &[f64], settings: &SolverSettings) -> Result<SolveReport, SolveError> {
    settings.validate()?;
    let (m, n) = a.shape();
    if b.len() != m {
        return Err(SolveError::RhsLength { expected: m, got: b.len() });
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(SolveError::NonFinite);
    }
    let bnorm = norm2(b);
    let feas_bound = settings.feas_tol * (1.0 + bnorm);

    // b must lie in range(A)
    let x_ls = Svd::new(a).solve_min_norm(b);
    let ls_res = residual_norm(a, &x_ls, b);
    if ls_res > feas_bound {
        return Ok(SolveReport {
            x: x_ls,
            y: vec![0.0; m],
            status: SolveStatus::Infeasible,
            primal_residual: ls_res,
            duality_gap: f64::INFINITY,
            iterations: 0,
        });
    }
    if bnorm == 0.0 {
        return Ok(SolveReport {
            x: vec![0.0; n],
            y: vec![0.0; m],
            status: SolveStatus::Optimal,
            primal_residual: 0.0,
            duality_gap: 0.0,
            iterations: 0,
        });
    }

    let mut split = DenseMatrix::zeros(m, 2 * n);
    for i in 0..m {
        let (u, v) = split.row_mut(i).split_at_mut(n);
        u.copy_from_slice(a.row(i));
        v.iter_mut().zip(a.row(i)).for_each(|(d, s)| *d = -s);
    }
    let c = vec![1.0; 2 * n];
    let lp = match solve_lp(&c, &split, b, &vec![0.0; 2 * n], settings) {
        Ok(sol) => sol,
        Err(LpError::Infeasible) => {
            return Ok(failed(n, m, SolveStatus::Infeasible, 0));
        }
        Err(_) => return Ok(failed(n, m, SolveStatus::NumericFailure, 0)),
    };
    let mut x: Vec<f64> = (0..n).map(|j| lp.x[j] - lp.x[n + j]).collect();
    let mut y = lp.y.clone();
    if let Some((xp, yp)) = polish(a, b, &x, &y, settings) {
        x = xp;
        y = yp;
    }

    let primal_residual = residual_norm(a, &x, b);
    let l1 = norm1(&x);
    let duality_gap = (l1 - dot(b, &y)).abs();
    let dual_inf = norm_inf(&a.tr_mul_vec(&y));
    let certified = primal_residual <= feas_bound
        && duality_gap <= settings.gap_tol * (1.0 + l1)
        && dual_inf <= 1.0 + settings.gap_tol;
    let status = if certified {
        SolveStatus::Optimal
    } else if lp.status == LpStatus::MaxIter {
        SolveStatus::MaxIter
    } else {
        SolveStatus::NumericFailure
    };
    Ok(SolveReport { x, y, status, primal_residual, duality_gap, iterations: lp.iterations })
}

fn failed(n: usize, m: usize, status: SolveStatus, iterations: usize) -> SolveReport {
    SolveReport {
        x: vec![0.0; n],
        y: vec![0.0; m],
        status,
        primal_residual: f64::INFINITY,
        duality_gap: f64::INFINITY,
        iterations,
    }
}

fn residual_norm(a: &DenseMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.mul_vec(x);
    norm2(&ax.iter().zip(b).map(|(p, q)| p - q).collect::<Vec<_>>())
}

/// Magnitude at or below which a basis-pursuit entry is treated as zero:
/// `10·feas_tol·max(1, ‖x‖∞)`.
pub fn polish_threshold(x: &[f64], settings: &SolverSettings) -> f64 {
    10.0 * settings.feas_tol * norm_inf(x).max(1.0)
}

/// Support of a basis-pursuit solution under the polishing threshold.
pub fn polish_support(x: &[f64], settings: &SolverSettings) -> SupportSet {
    SupportSet::of_vector(x, polish_threshold(x, settings))
}

fn polish(a: &DenseMatrix, b: &[f64], x: &[f64], y: &[f64], settings: &SolverSettings) -> Option<(Vec<f64>, Vec<f64>)> {
    let primary = polish_support(x, settings);
    if let Some(p) = polish_on(a, b, x, y, &primary, settings) {
        return Some(p);
    }
    // fallback: split at the largest relative gap in sorted magnitudes
    let m = a.rows();
    let mut mags: Vec<(f64, usize)> = x.iter().enumerate().map(|(j, v)| (v.abs(), j)).collect();
    mags.sort_by(|p, q| q.0.total_cmp(&p.0));
    let limit = m.min(mags.len() - 1);
    let (mut best, mut best_ratio) = (0, 0.0);
    for k in 0..limit {
        let ratio = mags[k].0 / mags[k + 1].0.max(f64::MIN_POSITIVE);
        if ratio > best_ratio {
            best_ratio = ratio;
            best = k + 1;
        }
    }
    if best_ratio < 1e3 || best == primary.len() {
        return None;
    }
    let idx = mags[..best].iter().map(|p| p.1).collect();
    let alt = SupportSet::new(idx, x.len()).ok()?;
    polish_on(a, b, x, y, &alt, settings)
}

fn polish_on(
    a: &DenseMatrix,
    b: &[f64],
    x: &[f64],
    y: &[f64],
    support: &SupportSet,
    settings: &SolverSettings,
) -> Option<(Vec<f64>, Vec<f64>)> {
    let m = a.rows();
    let k = support.len();
    if k == 0 || k > m {
        return None;
    }
    let a_s = a.select_columns(support.indices());
    if Svd::new(&a_s).rank() < k {
        return None;
    }
    let xs = Qr::new(&a_s).ok()?.solve_ls(b);
    let x_new = support.scatter(&xs);
    if residual_norm(a, &x_new, b) > settings.feas_tol * (1.0 + norm2(b)) {
        return None;
    }
    let signs_agree = support.indices().iter().zip(&xs).all(|(&j, v)| v.signum() == x[j].signum());
    // the iterate is only approximately feasible, so its norm is a loose bound
    let slack = settings.gap_tol.sqrt() * (1.0 + norm1(x));
    if !signs_agree || norm1(&xs) > norm1(x) + slack {
        return None;
    }
    // project y onto {y : A_Sᵀ y = sign(x_S)} along range(A_S)
    let target: Vec<f64> = xs.iter().map(|v| v.signum()).collect();
    let r: Vec<f64> = target.iter().zip(a_s.tr_mul_vec(y)).map(|(t, v)| t - v).collect();
    let gram = a_s.tr_matmul(&a_s).ok()?;
    let w = Cholesky::new(&gram).ok()?.solve(&r);
    let y_new: Vec<f64> = y.iter().zip(a_s.mul_vec(&w)).map(|(p, q)| p + q).collect();
    let y_out = if norm_inf(&a.tr_mul_vec(&y_new)) <= 1.0 + settings.gap_tol { y_new } else { y.to_vec() };
    Some((x_new, y_out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::max_abs_diff;

    fn a23() -> DenseMatrix {
        DenseMatrix::from_rows(&[[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]]).unwrap()
    }

    #[test]
    fn identity_is_exact() {
        let r = solve_bp(&DenseMatrix::identity(2), &[3.0, -4.0], &SolverSettings::default()).unwrap();
        assert!(r.is_optimal());
        assert!(max_abs_diff(&r.x, &[3.0, -4.0]) < 1e-12);
        assert!((r.objective() - 7.0).abs() < 1e-12);
    }

    #[test]
    fn shared_column_wins() {
        let r = solve_bp(&a23(), &[1.0, 1.0], &SolverSettings::default()).unwrap();
        assert!(r.is_optimal(), "{r:?}");
        assert!(max_abs_diff(&r.x, &[0.0, 0.0, 1.0]) < 1e-12, "{:?}", r.x);
        assert!((r.objective() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn opposite_signs_use_two_columns() {
        let r = solve_bp(&a23(), &[1.0, -1.0], &SolverSettings::default()).unwrap();
        assert!(r.is_optimal());
        assert!(max_abs_diff(&r.x, &[1.0, -1.0, 0.0]) < 1e-12, "{:?}", r.x);
        assert!((r.objective() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn dual_is_feasible_and_gap_closed() {
        let r = solve_bp(&a23(), &[1.0, 1.0], &SolverSettings::default()).unwrap();
        assert!(norm_inf(&a23().tr_mul_vec(&r.y)) <= 1.0 + 1e-9);
        assert!((dot(&[1.0, 1.0], &r.y) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn out_of_range_rhs_is_infeasible() {
        let a = DenseMatrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap();
        let r = solve_bp(&a, &[1.0, 0.0], &SolverSettings::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(
            solve_bp(&a23(), &[1.0], &SolverSettings::default()),
            Err(SolveError::RhsLength { expected: 2, got: 1 })
        );
        let bad = SolverSettings { recovery_tol: 1e-12, ..SolverSettings::default() };
        assert_eq!(solve_bp(&a23(), &[1.0, 1.0], &bad), Err(SolveError::InvalidSettings));
    }
}
