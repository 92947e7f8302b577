//! Basis pursuit against exhaustive basic-feasible-solution enumeration.

use jsrec_core::bpsolve::{check_smv_certificate, solve_bp, Verdict};
use jsrec_core::linalg::Svd;
use jsrec_core::matrix::{max_abs_diff, norm1, norm_inf, DenseMatrix};
use jsrec_core::rng::{gaussian_matrix, Rng};
use jsrec_core::SolverSettings;

/// Minimum of `1ᵀ(u+v)` over all basic feasible solutions of
/// `[A, −A] (u; v) = b, u, v ≥ 0`, by enumerating every `m`-column basis.
fn bfs_minimum(a: &DenseMatrix, b: &[f64]) -> f64 {
    let (m, n) = a.shape();
    let split = DenseMatrix::from_fn(m, 2 * n, |i, j| if j < n { a[(i, j)] } else { -a[(i, j - n)] });
    let mut best = f64::INFINITY;
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        let basis = split.select_columns(&idx);
        let svd = Svd::new(&basis);
        if svd.rank() == m {
            let xb = svd.solve_min_norm(b);
            if xb.iter().all(|&v| v >= -1e-12) {
                best = best.min(xb.iter().map(|v| v.max(0.0)).sum());
            }
        }
        // next combination
        let mut k = m;
        while k > 0 && idx[k - 1] == 2 * n - m + k - 1 {
            k -= 1;
        }
        if k == 0 {
            return best;
        }
        idx[k - 1] += 1;
        for t in k..m {
            idx[t] = idx[t - 1] + 1;
        }
    }
}

#[test]
fn oracle_matches_hand_examples() {
    let a = DenseMatrix::from_rows(&[[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]]).unwrap();
    assert!((bfs_minimum(&a, &[1.0, 1.0]) - 1.0).abs() < 1e-14);
    assert!((bfs_minimum(&a, &[1.0, -1.0]) - 2.0).abs() < 1e-14);
}

#[test]
fn objective_matches_vertex_enumeration() {
    let settings = SolverSettings::default();
    for trial in 0..200u64 {
        let mut rng = Rng::new(2024, trial);
        let m = 1 + rng.below(4);
        let n = m + rng.below(7 - m);
        let a = gaussian_matrix(m, n, &mut rng);
        let b = rng.normal_vec(m);
        let report = solve_bp(&a, &b, &settings).unwrap();
        let oracle = bfs_minimum(&a, &b);
        assert!(report.is_optimal(), "trial {trial}: {report:?}");
        assert!(
            (report.objective() - oracle).abs() <= 1e-8,
            "trial {trial} ({m}x{n}): ipm {} vs oracle {oracle}",
            report.objective()
        );
    }
}

#[test]
fn optimal_reports_satisfy_duality_invariants() {
    let settings = SolverSettings::default();
    for trial in 0..40u64 {
        let mut rng = Rng::new(77, trial);
        let a = gaussian_matrix(8, 20, &mut rng);
        let b = rng.normal_vec(8);
        let r = solve_bp(&a, &b, &settings).unwrap();
        assert!(r.is_optimal());
        let l1 = norm1(&r.x);
        let bty: f64 = b.iter().zip(&r.y).map(|(p, q)| p * q).sum();
        assert!((l1 - bty).abs() <= settings.gap_tol * (1.0 + l1));
        assert!(norm_inf(&a.tr_mul_vec(&r.y)) <= 1.0 + settings.gap_tol);
    }
}

#[test]
fn argmin_scales_with_rhs() {
    let settings = SolverSettings::default();
    for trial in 0..20u64 {
        let mut rng = Rng::new(5, trial);
        let a = gaussian_matrix(6, 15, &mut rng);
        let b = rng.normal_vec(6);
        let base = solve_bp(&a, &b, &settings).unwrap();
        for alpha in [1e-3, 0.5, 7.0, 1e3] {
            let scaled: Vec<f64> = b.iter().map(|v| alpha * v).collect();
            let r = solve_bp(&a, &scaled, &settings).unwrap();
            let expect: Vec<f64> = base.x.iter().map(|v| alpha * v).collect();
            assert!(
                max_abs_diff(&r.x, &expect) <= settings.recovery_tol * alpha.max(1.0),
                "trial {trial} alpha {alpha}"
            );
        }
    }
}

#[test]
fn certified_sparse_vectors_are_recovered() {
    let settings = SolverSettings::default();
    let mut certified = 0;
    for trial in 0..60u64 {
        let mut rng = Rng::new(31, trial);
        let a = gaussian_matrix(10, 30, &mut rng);
        let s = 1 + rng.below(4);
        let support = rng.support(30, s);
        let x0 = support.scatter(&rng.normal_vec(support.len()));
        let b = a.mul_vec(&x0);
        let r = solve_bp(&a, &b, &settings).unwrap();
        if check_smv_certificate(&a, &x0, &r.y, 1e-6).unwrap() == Verdict::UniqueOptimal {
            certified += 1;
            assert!(max_abs_diff(&r.x, &x0) <= settings.recovery_tol, "trial {trial}");
        }
    }
    assert!(certified > 30, "only {certified} certified instances");
}
