//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use jsrec::config::Tolerances;
use jsrec::experiment::ResultRow;
use jsrec::{run_experiment, ExperimentConfig, ExperimentKind, ExperimentOutput};
use jsrec_core::analysis::{check_nsp_uniform, face_count};
use jsrec_core::bpsolve::{check_smv_certificate, solve_bp, Verdict};
use jsrec_core::combinatorics::cnd;
use jsrec_core::matrix::{max_abs_diff, DenseMatrix};
use jsrec_core::mmv::{
    construct_diag_counterexample, construct_l12_succeeds_l11_fails, default_gamma_grid, solve_l11, solve_l12,
    SearchBudget,
};
use jsrec_core::recover::{boosted_l1, rembo_l1_with, FixedWeights, PipelineSettings};
use jsrec_core::rng::gaussian_matrix;
use jsrec_core::{ProblemInstance, Rng, SolverSettings};
use num_bigint::BigUint;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("C(n,d) table", c1_cnd_table),
        ("solver oracle equivalence", c2_oracle),
        ("certificate soundness", c3_certificate),
        ("NSP <=> face count", c4_nsp),
        ("boosted l1 model", c5_boosted),
        ("l11 degradation", c6_l11),
        ("ReMBo = boosted under unit weights", c7_rembo_reduction),
        ("counterexample pair", c8_counterexamples),
        ("pattern-sampling saturation", c9_saturation),
        ("l12 vs l11 ordering", c10_ordering),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.1}s]", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{secs:.1}s]", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let t = start.elapsed();
    if t > limit {
        return Err(format!("{what} took {:.1}s, limit {:.0}s", t.as_secs_f64(), limit.as_secs_f64()));
    }
    Ok(())
}

fn out_dir(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("jsrec-acceptance-{name}-{}", std::process::id()))
}

fn base_config(kind: ExperimentKind, name: &str) -> ExperimentConfig {
    ExperimentConfig {
        schema_version: 1,
        kind,
        m: 20,
        n: 80,
        r_values: vec![],
        s_values: vec![],
        trials: 200,
        seed: 20_080,
        max_iterations: 1,
        output_dir: out_dir(name),
        tolerances: Tolerances::default(),
        use_face_cache: true,
        grid_density: 10,
        cnd_max: 12,
    }
}

fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput, String> {
    let out = run_experiment(cfg).map_err(|e| e.to_string())?;
    let _ = std::fs::remove_dir_all(&cfg.output_dir);
    if out.aborted {
        return Err(format!("numeric failures: {} of {} trials", out.numeric_failures, out.trials_run));
    }
    Ok(out)
}

fn c1_cnd_table() -> Outcome {
    let start = Instant::now();
    const N: usize = 12;
    // recurrence table with C(1, d) = 2 and C(n, 0) = 0
    let mut rec = [[0u64; N + 1]; N + 1];
    rec[1][1..].fill(2);
    for n in 2..=N {
        for d in 1..=N {
            rec[n][d] = rec[n - 1][d - 1] + rec[n - 1][d];
        }
    }
    let choose = |n: u64, k: u64| -> u64 {
        if k > n {
            return 0;
        }
        (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
    };
    let big = |v: u64| BigUint::from(v);
    let mut checks = 0;
    for n in 1..=N as u64 {
        for d in 1..=N as u64 {
            let got = cnd(n, d);
            let closed = 2 * (0..d).map(|i| choose(n - 1, i)).sum::<u64>();
            if got != big(rec[n as usize][d as usize]) || got != big(closed) {
                return Err(format!(
                    "C({n},{d}) = {got}, recurrence {}, closed form {closed}",
                    rec[n as usize][d as usize]
                ));
            }
            if d <= n {
                let complement = if d == n { 0 } else { rec[n as usize][(n - d) as usize] };
                if got != big((1u64 << n) - complement) {
                    return Err(format!("complement identity fails at ({n},{d})"));
                }
            }
            checks += 1;
        }
    }
    for d in 1..=6u64 {
        if cnd(2 * d, d) != big(1 << (2 * d - 1)) {
            return Err(format!("C(2d,d) != 2^(2d-1) at d={d}"));
        }
    }
    within(start, Duration::from_secs(1), "table")?;
    Ok(format!("{checks} entries match recurrence, closed form and corollaries"))
}

/// Minimum of `1ᵀ(u+v)` over the basic feasible solutions of
/// `[A, −A](u; v) = b, u, v ≥ 0`, using Gaussian elimination on every
/// `m`-column basis.
fn bfs_minimum(a: &DenseMatrix, b: &[f64]) -> f64 {
    let (m, n) = a.shape();
    let col = |j: usize| -> Vec<f64> { (0..m).map(|i| if j < n { a[(i, j)] } else { -a[(i, j - n)] }).collect() };
    let mut best = f64::INFINITY;
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        let cols: Vec<Vec<f64>> = idx.iter().map(|&j| col(j)).collect();
        if let Some(x) = solve_square(&cols, b) {
            if x.iter().all(|&v| v >= -1e-12) {
                best = best.min(x.iter().map(|v| v.max(0.0)).sum());
            }
        }
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

/// Solves the square system with the given columns by partial pivoting, or
/// `None` when it is (numerically) singular.
fn solve_square(cols: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let m = b.len();
    let mut aug: Vec<Vec<f64>> = (0..m).map(|i| cols.iter().map(|c| c[i]).chain([b[i]]).collect()).collect();
    let scale = cols.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs())).max(1e-300);
    for k in 0..m {
        let p = (k..m).max_by(|&i, &j| aug[i][k].abs().total_cmp(&aug[j][k].abs()))?;
        if aug[p][k].abs() <= 1e-10 * scale {
            return None;
        }
        aug.swap(k, p);
        for i in k + 1..m {
            let f = aug[i][k] / aug[k][k];
            let pivot = aug[k].clone();
            for (v, &pv) in aug[i][k..].iter_mut().zip(&pivot[k..]) {
                *v -= f * pv;
            }
        }
    }
    let mut x = vec![0.0; m];
    for k in (0..m).rev() {
        let s: f64 = (k + 1..m).map(|j| aug[k][j] * x[j]).sum();
        x[k] = (aug[k][m] - s) / aug[k][k];
    }
    Some(x)
}

fn c2_oracle() -> Outcome {
    let start = Instant::now();
    let settings = SolverSettings::default();
    let mut worst = 0.0f64;
    for trial in 0..200u64 {
        let mut rng = Rng::new(2, trial);
        let m = 1 + rng.below(4);
        let n = m + rng.below(7 - m);
        let a = gaussian_matrix(m, n, &mut rng);
        let b = rng.normal_vec(m);
        let rep = solve_bp(&a, &b, &settings).map_err(|e| e.to_string())?;
        let oracle = bfs_minimum(&a, &b);
        let err = (rep.objective() - oracle).abs();
        worst = worst.max(err);
        if err > 1e-8 {
            return Err(format!("trial {trial} ({m}x{n}): objective {} vs enumeration {oracle}", rep.objective()));
        }
    }
    within(start, Duration::from_secs(30), "oracle run")?;
    Ok(format!("200 instances, max objective error {worst:.1e}"))
}

fn c3_certificate() -> Outcome {
    let settings = SolverSettings::default();
    let (mut certified, mut violations) = (0, 0);
    for trial in 0..100u64 {
        let mut rng = Rng::new(3, trial);
        let a = gaussian_matrix(10, 30, &mut rng);
        let s = 1 + rng.below(3);
        let support = rng.support(30, s);
        let x0 = support.scatter(&rng.normal_vec(s));
        let rep = solve_bp(&a, &a.mul_vec(&x0), &settings).map_err(|e| e.to_string())?;
        if check_smv_certificate(&a, &x0, &rep.y, 1e-6).map_err(|e| e.to_string())? == Verdict::UniqueOptimal {
            certified += 1;
            if max_abs_diff(&rep.x, &x0) > 1e-5 {
                violations += 1;
            }
        }
    }
    if violations > 0 || certified == 0 {
        return Err(format!("{violations} violations among {certified} certified instances"));
    }
    Ok(format!("{certified}/100 certified, 0 violations"))
}

fn c4_nsp() -> Outcome {
    let settings = SolverSettings::default();
    let (mut holds, mut disagreements) = (0, Vec::new());
    for trial in 0..50u64 {
        let mut rng = Rng::new(4, trial);
        let a = gaussian_matrix(6, 15, &mut rng);
        let k = 1 + rng.below(3);
        let support = rng.support(15, k);
        let fc = face_count(&a, &support, &settings).map_err(|e| e.to_string())?;
        let nsp = check_nsp_uniform(&a, &support, &settings).map_err(|e| e.to_string())?;
        if nsp.holds() != (fc.surviving == fc.total) {
            disagreements.push(trial);
        }
        holds += usize::from(nsp.holds());
    }
    if !disagreements.is_empty() {
        return Err(format!("disagreements at trials {disagreements:?}"));
    }
    Ok(format!("50 instances agree ({holds} hold, {} fail)", 50 - holds))
}

/// The boosted experiment behind criteria 5 and 6, run once.
fn boosted_run() -> Result<&'static (ExperimentOutput, Duration), String> {
    static RUN: OnceLock<Result<(ExperimentOutput, Duration), String>> = OnceLock::new();
    RUN.get_or_init(|| {
        let start = Instant::now();
        let mut cfg = base_config(ExperimentKind::Boosted, "boosted");
        cfg.s_values = vec![8, 9, 10];
        cfg.r_values = (1..=8).collect();
        let out = run(&cfg)?;
        Ok((out, start.elapsed()))
    })
    .as_ref()
    .map_err(Clone::clone)
}

/// `(cells within 3σ of the model, total cells)` for one method, with σ the
/// binomial standard error at the model rate.
fn model_agreement(out: &ExperimentOutput, method: &str) -> (usize, usize, Vec<String>) {
    let (mut ok, mut total, mut misses) = (0, 0, Vec::new());
    for row in out.rate_rows().filter(|r| r.method == method) {
        let q = row.model_rate.expect("model present");
        let sigma = (q * (1.0 - q) / row.trials as f64).sqrt();
        total += 1;
        if (row.empirical_rate - q).abs() <= 3.0 * sigma + 1e-12 {
            ok += 1;
        } else {
            misses.push(format!("s={} r={} emp={:.3} model={:.3}", row.s, row.r, row.empirical_rate, q));
        }
    }
    (ok, total, misses)
}

fn c5_boosted() -> Outcome {
    let (out, t) = boosted_run()?;
    let (ok, total, misses) = model_agreement(out, "boosted");
    if total != 24 || (ok as f64) < 0.9 * total as f64 {
        return Err(format!("{ok}/{total} cells within 3σ; misses: {misses:?}"));
    }
    if *t > Duration::from_secs(20 * 60) {
        return Err(format!("runtime {:.0}s exceeds 20 min", t.as_secs_f64()));
    }
    Ok(format!("{ok}/{total} cells within 3σ of 1-(1-p)^r"))
}

fn c6_l11() -> Outcome {
    let (out, _) = boosted_run()?;
    let (ok, total, misses) = model_agreement(out, "l11");
    if total != 24 || (ok as f64) < 0.9 * total as f64 {
        return Err(format!("{ok}/{total} cells within 3σ; misses: {misses:?}"));
    }
    let rows: Vec<_> = out.rate_rows().filter(|r| r.method == "l11").collect();
    for pair in rows.windows(2).filter(|w| w[0].s == w[1].s) {
        let noise = 2.0 * (pair[0].sigma().powi(2) + pair[1].sigma().powi(2)).sqrt();
        if pair[1].empirical_rate > pair[0].empirical_rate + noise + 1e-12 {
            return Err(format!("rate increases from r={} to r={} at s={}", pair[0].r, pair[1].r, pair[0].s));
        }
    }
    Ok(format!("{ok}/{total} cells within 3σ of p^r; non-increasing in r"))
}

fn c7_rembo_reduction() -> Outcome {
    let settings = PipelineSettings::default();
    let (mut mismatches, mut recovered) = (Vec::new(), 0);
    for trial in 0..50u64 {
        let mut rng = Rng::new(7, trial);
        let a = gaussian_matrix(10, 24, &mut rng);
        let s = 2 + rng.below(5);
        let r = 1 + rng.below(4);
        let support = rng.support(24, s);
        let inst = ProblemInstance::gaussian_on_support(a, &support, r, &mut rng);
        let boosted = boosted_l1(&inst.a, &inst.b, &settings).map_err(|e| e.to_string())?;
        let rembo = rembo_l1_with(&inst.a, &inst.b, r, &mut FixedWeights::unit_vectors(r), &settings)
            .map_err(|e| e.to_string())?;
        if boosted.outcome != rembo.outcome || boosted.success_iteration() != rembo.success_iteration() {
            mismatches.push(trial);
        }
        recovered += usize::from(boosted.is_recovered());
    }
    if !mismatches.is_empty() {
        return Err(format!("mismatches at trials {mismatches:?}"));
    }
    Ok(format!("50 instances decision-identical ({recovered} recovered)"))
}

fn c8_counterexamples() -> Outcome {
    let s = SolverSettings::default();
    let mut diag_ok = 0;
    for seed in 0..10u64 {
        let mut rng = Rng::new(80 + seed, 0);
        let a = gaussian_matrix(10, 30, &mut rng).normalize_columns();
        let inst = construct_diag_counterexample(&a, 11, &mut rng).map_err(|e| format!("seed {seed}: {e}"))?;
        let l11 = solve_l11(&inst.a, &inst.b, &s).map_err(|e| e.to_string())?;
        let l12 = solve_l12(&inst.a, &inst.b, &s).map_err(|e| e.to_string())?;
        if l11.recovers(&inst.x0, 1e-5) && !l12.recovers(&inst.x0, 1e-5) {
            diag_ok += 1;
        }
    }
    if diag_ok != 10 {
        return Err(format!("(a) diagonal construction separated {diag_ok}/10 seeds"));
    }
    let mut mixed_ok = 0;
    let mut gammas = Vec::new();
    for k in [5usize, 7] {
        for seed in 0..3u64 {
            let mut rng = Rng::new(88 + seed, k as u64);
            let a = gaussian_matrix(20, 60, &mut rng);
            // The constructor needs both recoverable and unrecoverable patterns
            // on the support, which the face count tells us up front.
            let support = (0..200)
                .map(|_| rng.support(60, k))
                .find(|sup| {
                    face_count(&a, sup, &s).is_ok_and(|fc| fc.surviving > BigUint::ZERO && fc.surviving < fc.total)
                })
                .ok_or_else(|| format!("no support with mixed patterns for |I|={k}"))?;
            match construct_l12_succeeds_l11_fails(
                &a,
                &support,
                &mut rng,
                &default_gamma_grid(),
                &s,
                SearchBudget::default(),
            ) {
                Ok((inst, gamma)) => {
                    let l12 = solve_l12(&a, &inst.b, &s).map_err(|e| e.to_string())?;
                    let l11 = solve_l11(&a, &inst.b, &s).map_err(|e| e.to_string())?;
                    if l12.recovers(&inst.x0, 1e-5) && !l11.recovers(&inst.x0, 1e-5) {
                        mixed_ok += 1;
                        gammas.push(format!("{gamma:.2e}"));
                    }
                }
                Err(e) => return Err(format!("(b) |I|={k} seed {seed}: {e}")),
            }
        }
    }
    if mixed_ok != 6 {
        return Err(format!("(b) {mixed_ok}/6 constructions verified"));
    }
    Ok(format!("(a) 10/10 seeds; (b) 6/6 constructions verified, gamma {}", gammas.join(" ")))
}

fn saturation(out: &ExperimentOutput) -> Vec<(u64, usize)> {
    out.rows
        .iter()
        .filter_map(|r| match r {
            ResultRow::Saturation(p) => Some((p.trials, p.unique_pairs)),
            _ => None,
        })
        .collect()
}

fn c9_saturation() -> Outcome {
    let start = Instant::now();
    let mut small = base_config(ExperimentKind::PatternSampling, "sat4");
    small.m = 4;
    small.r_values = vec![2];
    small.trials = 10_000;
    let traj = saturation(&run(&small)?);
    let reached = traj.iter().find(|p| p.1 == 4).map(|p| p.0);
    if traj.iter().any(|p| p.1 > 4) || reached.is_none() {
        return Err(format!("4x2: trajectory {traj:?}"));
    }
    let mut big = base_config(ExperimentKind::PatternSampling, "sat10");
    big.m = 10;
    big.r_values = vec![5];
    big.trials = 1_000_000;
    let traj = saturation(&run(&big)?);
    let last = traj.last().copied().unwrap_or((0, 0));
    if traj.iter().any(|p| p.1 > 256) || traj.windows(2).any(|w| w[1].1 < w[0].1) {
        return Err("10x5: trajectory exceeds 256 or decreases".into());
    }
    if last.1 < 200 {
        return Err(format!("10x5: only {} unique pairs after {} trials", last.1, big.trials));
    }
    within(start, Duration::from_secs(120), "sampling")?;
    Ok(format!("4x2 saturates at 4 by trial {}; 10x5 reaches {} <= 256", reached.unwrap(), last.1))
}

fn c10_ordering() -> Outcome {
    let mut cfg = base_config(ExperimentKind::L11VsL12, "order");
    cfg.m = 20;
    cfg.n = 60;
    cfg.r_values = vec![4];
    cfg.s_values = (1..=12).collect();
    cfg.trials = 100;
    let out = run(&cfg)?;
    let rate = |method: &str, s: usize| out.rate_rows().find(|r| r.method == method && r.s == s).cloned();
    let (mut separated, mut summary) = (0, Vec::new());
    for s in 1..=12 {
        let (l11, l12) = rate("l11", s).zip(rate("l12", s)).ok_or_else(|| format!("missing rows at s={s}"))?;
        let pooled = (l11.ci_halfwidth.powi(2) + l12.ci_halfwidth.powi(2)).sqrt();
        summary.push(format!("{s}:{:.2}/{:.2}", l11.empirical_rate, l12.empirical_rate));
        if (l12.empirical_rate - l11.empirical_rate).abs() > 2.0 * pooled {
            separated += 1;
            if l12.empirical_rate < l11.empirical_rate {
                return Err(format!("l11 beats l12 at s={s}: {} vs {}", l11.empirical_rate, l12.empirical_rate));
            }
        }
    }
    Ok(format!("{separated} separated cells, all favor l12 (s:l11/l12 {})", summary.join(" ")))
}
