//! Dense linear programs `min cᵀx s.t. A x = b, x ≥ l`.
//!
//! Homogeneous self-dual embedding solved with Mehrotra's predictor-corrector
//! (the formulation of Andersen & Andersen, as used by SciPy's `ip` method).
//! The embedding gives infeasibility and unboundedness certificates through
//! `τ → 0` without a phase-one problem. Dependent equality rows are removed
//! up front; an inconsistent equality system is reported as infeasible.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use super::SolverSettings;
use crate::linalg::{Cholesky, Svd};
use crate::matrix::{dot, norm2, DenseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    /// Iteration cap reached; the returned point is the last iterate.
    MaxIter,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("numerical failure in the interior-point iteration")]
    NumericFailure,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    /// Equality multipliers, one per input row (zero for dropped dependent rows).
    pub y: Vec<f64>,
    /// Reduced costs `c − Aᵀy`.
    pub z: Vec<f64>,
    pub objective: f64,
    pub primal_residual: f64,
    pub duality_gap: f64,
    pub iterations: usize,
    pub status: LpStatus,
}

/// Solves `min cᵀx s.t. a_eq x = b_eq, x ≥ lower_bounds`.
pub fn solve_lp(
    c: &[f64],
    a_eq: &DenseMatrix,
    b_eq: &[f64],
    lower_bounds: &[f64],
    settings: &SolverSettings,
) -> Result<LpSolution, LpError> {
    let (m, n) = a_eq.shape();
    if c.len() != n || lower_bounds.len() != n {
        return Err(LpError::DimensionMismatch("c and lower bounds must have one entry per column"));
    }
    if b_eq.len() != m {
        return Err(LpError::DimensionMismatch("b_eq must have one entry per row"));
    }
    if c.iter().chain(b_eq).chain(lower_bounds).any(|v| !v.is_finite()) {
        return Err(LpError::NumericFailure);
    }

    // shift x = x' + l so that x' ≥ 0
    let al = a_eq.mul_vec(lower_bounds);
    let b: Vec<f64> = b_eq.iter().zip(&al).map(|(bi, ai)| bi - ai).collect();

    let kept = independent_rows(a_eq);
    check_consistent(a_eq, &b, &kept, settings)?;

    let (xs, y_kept, iterations, status) = if kept.is_empty() {
        // every row is zero and consistent: min cᵀx over x ≥ 0
        if c.iter().any(|&ci| ci < 0.0) {
            return Err(LpError::Unbounded);
        }
        (vec![0.0; n], Vec::new(), 0, LpStatus::Optimal)
    } else {
        let a = a_eq.select_rows(&kept);
        let bk: Vec<f64> = kept.iter().map(|&i| b[i]).collect();
        hsd(c, &a, &bk, settings)?
    };

    let mut y = vec![0.0; m];
    for (&i, &v) in kept.iter().zip(&y_kept) {
        y[i] = v;
    }
    let x: Vec<f64> = xs.iter().zip(lower_bounds).map(|(v, l)| v + l).collect();
    let aty = a_eq.tr_mul_vec(&y);
    let z: Vec<f64> = c.iter().zip(&aty).map(|(ci, ai)| ci - ai).collect();
    let ax = a_eq.mul_vec(&x);
    let primal_residual = norm2(&ax.iter().zip(b_eq).map(|(p, q)| p - q).collect::<Vec<_>>());
    let objective = dot(c, &x);
    // dual objective of the shifted problem plus the constant cᵀl
    let dual_objective = dot(&b, &y) + dot(c, lower_bounds);
    Ok(LpSolution {
        x,
        y,
        z,
        objective,
        primal_residual,
        duality_gap: (objective - dual_objective).abs(),
        iterations,
        status,
    })
}

/// Indices of a maximal set of linearly independent rows (modified
/// Gram-Schmidt with a relative drop tolerance).
fn independent_rows(a: &DenseMatrix) -> Vec<usize> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut kept = Vec::new();
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    let tol = 1e-10 * scale * (a.cols() as f64).sqrt();
    for i in 0..a.rows() {
        let mut r = a.row(i).to_vec();
        for q in &basis {
            let p = dot(q, &r);
            r.iter_mut().zip(q).for_each(|(ri, qi)| *ri -= p * qi);
        }
        let nr = norm2(&r);
        if nr > tol {
            r.iter_mut().for_each(|v| *v /= nr);
            basis.push(r);
            kept.push(i);
        }
    }
    kept
}

fn check_consistent(a: &DenseMatrix, b: &[f64], kept: &[usize], settings: &SolverSettings) -> Result<(), LpError> {
    let bound = settings.feas_tol * (1.0 + norm2(b));
    if kept.len() == a.rows() {
        return Ok(());
    }
    let x = if kept.is_empty() {
        vec![0.0; a.cols()]
    } else {
        let ak = a.select_rows(kept);
        let bk: Vec<f64> = kept.iter().map(|&i| b[i]).collect();
        Svd::new(&ak).solve_min_norm(&bk)
    };
    let r: Vec<f64> = a.mul_vec(&x).iter().zip(b).map(|(p, q)| p - q).collect();
    if norm2(&r) > bound {
        return Err(LpError::Infeasible);
    }
    Ok(())
}

struct Direction {
    dx: Vec<f64>,
    dy: Vec<f64>,
    dz: Vec<f64>,
    dtau: f64,
    dkappa: f64,
}

/// Normal-equation solves `A D Aᵀ v = r2 + A D r1`, `u = D (Aᵀ v − r1)`.
struct NormalEquations<'a> {
    a: &'a DenseMatrix,
    dinv: Vec<f64>,
    chol: Cholesky,
}

impl<'a> NormalEquations<'a> {
    fn new(a: &'a DenseMatrix, dinv: Vec<f64>) -> Result<Self, LpError> {
        let m = a.rows();
        let mut mm = DenseMatrix::zeros(m, m);
        for i in 0..m {
            let ai = a.row(i);
            for k in 0..=i {
                let ak = a.row(k);
                let s: f64 = ai.iter().zip(ak).zip(&dinv).map(|((p, q), d)| p * q * d).sum();
                mm[(i, k)] = s;
                mm[(k, i)] = s;
            }
        }
        if mm.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(LpError::NumericFailure);
        }
        let chol = Cholesky::new_modified(&mm).map_err(|_| LpError::NumericFailure)?;
        Ok(Self { a, dinv, chol })
    }

    fn solve(&self, r1: &[f64], r2: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let dr1: Vec<f64> = self.dinv.iter().zip(r1).map(|(d, r)| d * r).collect();
        let rhs: Vec<f64> = r2.iter().zip(self.a.mul_vec(&dr1)).map(|(p, q)| p + q).collect();
        let v = self.chol.solve(&rhs);
        let atv = self.a.tr_mul_vec(&v);
        let u = self.dinv.iter().zip(atv.iter().zip(r1)).map(|(d, (p, q))| d * (p - q)).collect();
        (u, v)
    }
}

#[allow(clippy::type_complexity)]
fn hsd(
    c: &[f64],
    a: &DenseMatrix,
    b: &[f64],
    settings: &SolverSettings,
) -> Result<(Vec<f64>, Vec<f64>, usize, LpStatus), LpError> {
    let (m, n) = a.shape();
    let tol = settings.feas_tol.min(settings.gap_tol) * 0.1;

    let mut x = vec![1.0; n];
    let mut y = vec![0.0; m];
    let mut z = vec![1.0; n];
    let mut tau = 1.0;
    let mut kappa = 1.0;

    let r_p = |x: &[f64], tau: f64| -> Vec<f64> { b.iter().zip(a.mul_vec(x)).map(|(bi, ax)| bi * tau - ax).collect() };
    let r_d = |y: &[f64], z: &[f64], tau: f64| -> Vec<f64> {
        let aty = a.tr_mul_vec(y);
        c.iter().zip(aty).zip(z).map(|((ci, ai), zi)| ci * tau - ai - zi).collect()
    };
    let r_g = |x: &[f64], y: &[f64], kappa: f64| kappa + dot(c, x) - dot(b, y);
    let mu_of = |x: &[f64], z: &[f64], tau: f64, kappa: f64| (dot(x, z) + tau * kappa) / (n as f64 + 1.0);

    let rp0 = norm2(&r_p(&x, tau)).max(1.0);
    let rd0 = norm2(&r_d(&y, &z, tau)).max(1.0);
    let rg0 = r_g(&x, &y, kappa).abs().max(1.0);
    let mu0 = mu_of(&x, &z, tau, kappa);

    let mut stalled = 0;
    for iter in 1..=settings.max_iter {
        let rp = r_p(&x, tau);
        let rd = r_d(&y, &z, tau);
        let rg = r_g(&x, &y, kappa);
        let mu = mu_of(&x, &z, tau, kappa);

        let dinv: Vec<f64> = x.iter().zip(&z).map(|(xi, zi)| xi / zi).collect();
        let ne = NormalEquations::new(a, dinv)?;
        let (p, q) = ne.solve(c, b);

        let mut gamma = 0.0;
        let mut dir: Option<Direction> = None;
        for corrector in [false, true] {
            let eta = 1.0 - gamma;
            let mut rhat_xs: Vec<f64> = x.iter().zip(&z).map(|(xi, zi)| gamma * mu - xi * zi).collect();
            let mut rhat_tk = gamma * mu - tau * kappa;
            if corrector {
                let d = dir.as_ref().expect("predictor computed first");
                rhat_xs.iter_mut().zip(d.dx.iter().zip(&d.dz)).for_each(|(r, (dx, dz))| *r -= dx * dz);
                rhat_tk -= d.dtau * d.dkappa;
            }
            let rhat_p: Vec<f64> = rp.iter().map(|v| eta * v).collect();
            let rhat_d: Vec<f64> = rd.iter().map(|v| eta * v).collect();
            let rhat_g = eta * rg;

            let r1: Vec<f64> = rhat_d.iter().zip(rhat_xs.iter().zip(&x)).map(|(d, (r, xi))| d - r / xi).collect();
            let (u, v) = ne.solve(&r1, &rhat_p);
            let denom = kappa / tau + (-dot(c, &p) + dot(b, &q));
            let dtau = (rhat_g + rhat_tk / tau - (-dot(c, &u) + dot(b, &v))) / denom;
            let dx: Vec<f64> = u.iter().zip(&p).map(|(ui, pi)| ui + pi * dtau).collect();
            let dy: Vec<f64> = v.iter().zip(&q).map(|(vi, qi)| vi + qi * dtau).collect();
            let dz: Vec<f64> = rhat_xs
                .iter()
                .zip(z.iter().zip(dx.iter().zip(&x)))
                .map(|(r, (zi, (dxi, xi)))| (r - zi * dxi) / xi)
                .collect();
            let dkappa = (rhat_tk - kappa * dtau) / tau;
            let d = Direction { dx, dy, dz, dtau, dkappa };
            if !corrector {
                let alpha = step_length(&x, &z, tau, kappa, &d, 1.0);
                gamma = (1.0 - alpha).powi(2) * (1.0 - alpha).min(0.1);
            }
            dir = Some(d);
        }
        let d = dir.expect("direction computed");
        if d.dx.iter().chain(&d.dy).chain(&d.dz).any(|v| !v.is_finite()) || !d.dtau.is_finite() {
            return Err(LpError::NumericFailure);
        }
        let alpha = step_length(&x, &z, tau, kappa, &d, 0.99995);
        x.iter_mut().zip(&d.dx).for_each(|(v, dv)| *v += alpha * dv);
        y.iter_mut().zip(&d.dy).for_each(|(v, dv)| *v += alpha * dv);
        z.iter_mut().zip(&d.dz).for_each(|(v, dv)| *v += alpha * dv);
        tau += alpha * d.dtau;
        kappa += alpha * d.dkappa;

        let rho_p = norm2(&r_p(&x, tau)) / rp0;
        let rho_d = norm2(&r_d(&y, &z, tau)) / rd0;
        let rho_g = r_g(&x, &y, kappa).abs() / rg0;
        let rho_mu = mu_of(&x, &z, tau, kappa) / mu0;
        let bty = dot(b, &y);
        let rho_a = (dot(c, &x) - bty).abs() / (tau + bty.abs());

        if rho_p <= tol && rho_d <= tol && rho_a <= tol {
            return Ok(finish(x, y, tau, iter, LpStatus::Optimal));
        }
        let tau_small = |lim: f64| tau < tol * lim;
        if (rho_p < tol && rho_d < tol && rho_g < tol && tau_small(kappa.max(1.0)))
            || (rho_mu < tol && tau_small(kappa.min(1.0)))
        {
            return Err(if bty > tol { LpError::Infeasible } else { LpError::Unbounded });
        }
        // no progress possible once the step collapses repeatedly
        stalled = if alpha < 1e-12 { stalled + 1 } else { 0 };
        if stalled >= 3 {
            return Ok(finish(x, y, tau, iter, LpStatus::MaxIter));
        }
    }
    Ok(finish(x, y, tau, settings.max_iter, LpStatus::MaxIter))
}

fn finish(x: Vec<f64>, y: Vec<f64>, tau: f64, iter: usize, status: LpStatus) -> (Vec<f64>, Vec<f64>, usize, LpStatus) {
    (x.iter().map(|v| v / tau).collect(), y.iter().map(|v| v / tau).collect(), iter, status)
}

fn step_length(x: &[f64], z: &[f64], tau: f64, kappa: f64, d: &Direction, alpha0: f64) -> f64 {
    let ratio = |v: &[f64], dv: &[f64]| {
        v.iter().zip(dv).filter(|(_, dvi)| **dvi < 0.0).fold(1.0_f64, |acc, (vi, dvi)| acc.min(alpha0 * vi / -dvi))
    };
    let mut alpha = ratio(x, &d.dx).min(ratio(z, &d.dz));
    if d.dtau < 0.0 {
        alpha = alpha.min(alpha0 * tau / -d.dtau);
    }
    if d.dkappa < 0.0 {
        alpha = alpha.min(alpha0 * kappa / -d.dkappa);
    }
    alpha.min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings() -> SolverSettings {
        SolverSettings::default()
    }

    #[test]
    fn split_variable_example() {
        // min u + v s.t. u − v = 2, u, v ≥ 0
        let a = DenseMatrix::from_rows(&[[1.0, -1.0]]).unwrap();
        let sol = solve_lp(&[1.0, 1.0], &a, &[2.0], &[0.0, 0.0], &settings()).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.x[0] - 2.0).abs() < 1e-8 && sol.x[1].abs() < 1e-8, "{:?}", sol.x);
        assert!((sol.objective - 2.0).abs() < 1e-8);
    }

    #[test]
    fn inconsistent_equalities_are_infeasible() {
        let a = DenseMatrix::from_rows(&[[1.0], [1.0]]).unwrap();
        assert_eq!(solve_lp(&[1.0], &a, &[1.0, 2.0], &[0.0], &settings()), Err(LpError::Infeasible));
    }

    #[test]
    fn sign_infeasibility_detected_by_embedding() {
        // u + v = −1 with u, v ≥ 0
        let a = DenseMatrix::from_rows(&[[1.0, 1.0]]).unwrap();
        assert_eq!(solve_lp(&[1.0, 1.0], &a, &[-1.0], &[0.0, 0.0], &settings()), Err(LpError::Infeasible));
    }

    #[test]
    fn unbounded_detected() {
        // min −u s.t. u − v = 0
        let a = DenseMatrix::from_rows(&[[1.0, -1.0]]).unwrap();
        assert_eq!(solve_lp(&[-1.0, 0.0], &a, &[0.0], &[0.0, 0.0], &settings()), Err(LpError::Unbounded));
    }

    #[test]
    fn dependent_rows_are_dropped() {
        // duplicated row, consistent
        let a = DenseMatrix::from_rows(&[[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 1.0]]).unwrap();
        let sol = solve_lp(&[1.0, 2.0, 1.0], &a, &[1.0, 1.0, 1.0], &[0.0; 3], &settings()).unwrap();
        // x = (1, 0, 1) with objective 2
        assert!((sol.objective - 2.0).abs() < 1e-8, "{sol:?}");
        assert!(sol.primal_residual < 1e-8);
    }

    #[test]
    fn lower_bounds_shift() {
        // min x s.t. x + s = 5, x ≥ 3, s ≥ 0  →  x = 3
        let a = DenseMatrix::from_rows(&[[1.0, 1.0]]).unwrap();
        let sol = solve_lp(&[1.0, 0.0], &a, &[5.0], &[3.0, 0.0], &settings()).unwrap();
        assert!((sol.x[0] - 3.0).abs() < 1e-8, "{:?}", sol.x);
        assert!(sol.duality_gap < 1e-7);
    }
}
