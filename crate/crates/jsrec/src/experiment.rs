//! Monte-Carlo experiment orchestration.
//!
//! Every random quantity is drawn from a stream determined by the config
//! seed and the trial index, so results do not depend on thread count or
//! scheduling. Trials run in parallel; aggregation happens in trial order on
//! the calling thread, which also does all file writes.

use std::fs;
use std::path::PathBuf;

use jsrec_core::analysis::{face_count_range, prob_boosted, prob_l1, prob_l11, prob_rembo, AnalysisError, FaceCount};
use jsrec_core::bpsolve::{solve_bp, SolveError};
use jsrec_core::combinatorics::{cnd, sample_sign_patterns_range, CombinatoricsError, PatternStats};
use jsrec_core::matrix::max_abs_diff;
use jsrec_core::mmv::{solve_l11, solve_l12, MmvError};
use jsrec_core::recover::{
    boosted_l1, boosted_l1_cached, l11_cached, rembo_l1, rembo_l1_cached, support_threshold, PipelineReport,
    PipelineSettings, RecoverError,
};
use jsrec_core::rng::gaussian_matrix;
use jsrec_core::{DenseMatrix, ProblemInstance, Rng, SolveStatus, SolverSettings, SupportSet};
use num_bigint::BigUint;
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::io::{self, fmt_f64, CsvTable, IoError};
use crate::plot::{emit_plot, Axes, PlotError, Series};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "JSREC_THREADS";

/// Largest tolerated fraction of trials hitting a numeric failure.
pub const MAX_NUMERIC_FAILURE_RATE: f64 = 0.01;

const MATRIX_LABEL: u64 = 0x4d41_5452_4958;
const SUPPORT_LABEL: u64 = 0x5355_5050;
const WEIGHTS_LABEL: u64 = 0x5745_4947;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Mmv(#[from] MmvError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Recover(#[from] RecoverError),
    #[error(transparent)]
    Combinatorics(#[from] CombinatoricsError),
    #[error(transparent)]
    Plot(#[from] PlotError),
    #[error("thread pool: {0}")]
    Threads(String),
    #[error("{0}")]
    Setup(String),
}

/// Recovery rate of one method in one `(s, r)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub method: &'static str,
    pub s: usize,
    pub r: usize,
    pub trials: u64,
    pub successes: u64,
    pub empirical_rate: f64,
    /// 95% normal-approximation binomial half-width.
    pub ci_halfwidth: f64,
    pub model_rate: Option<f64>,
    pub numeric_failures: u64,
}

impl RateRow {
    pub fn new(method: &'static str, s: usize, r: usize, successes: u64, trials: u64) -> Self {
        let p = successes as f64 / trials as f64;
        Self {
            method,
            s,
            r,
            trials,
            successes,
            empirical_rate: p,
            ci_halfwidth: ci_halfwidth(p, trials),
            model_rate: None,
            numeric_failures: 0,
        }
    }

    /// Binomial standard error of the empirical rate.
    pub fn sigma(&self) -> f64 {
        self.ci_halfwidth / 1.96
    }
}

/// One barycentric grid point of a triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleRow {
    pub triangle: String,
    pub weights: [f64; 3],
    pub l12_recovered: bool,
    pub l11_recovered: bool,
}

/// Unique patterns seen in the first `trials` draws.
#[derive(Debug, Clone, PartialEq)]
pub struct SaturationRow {
    pub r: usize,
    pub trials: u64,
    pub unique_pairs: usize,
    /// `C(m, r) / 2`, the most pairs that can appear.
    pub max_pairs: BigUint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CndRow {
    pub n: u64,
    pub d: u64,
    pub value: BigUint,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ResultRow {
    Rate(RateRow),
    Triangle(TriangleRow),
    Saturation(SaturationRow),
    Cnd(CndRow),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub trials_run: u64,
    pub numeric_failures: u64,
    /// The run stopped early because the numeric failure rate exceeded
    /// [`MAX_NUMERIC_FAILURE_RATE`]; `rows` holds the cells finished so far.
    pub aborted: bool,
    pub files: Vec<PathBuf>,
}

impl ExperimentOutput {
    pub fn rate_rows(&self) -> impl Iterator<Item = &RateRow> {
        self.rows.iter().filter_map(|r| match r {
            ResultRow::Rate(r) => Some(r),
            _ => None,
        })
    }
}

pub fn ci_halfwidth(p: f64, trials: u64) -> f64 {
    1.96 * (p * (1.0 - p) / trials as f64).sqrt()
}

/// Worker count from [`THREADS_ENV`], or 0 for rayon's default.
pub fn thread_cap() -> usize {
    std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(0)
}

fn pool() -> Result<rayon::ThreadPool, ExperimentError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(thread_cap())
        .build()
        .map_err(|e| ExperimentError::Threads(e.to_string()))
}

fn cell_label(tag: u64, s: usize, r: usize) -> u64 {
    (tag << 40) ^ ((s as u64) << 20) ^ r as u64
}

/// The fixed sensing matrix of a run.
pub fn experiment_matrix(cfg: &ExperimentConfig) -> DenseMatrix {
    gaussian_matrix(cfg.m, cfg.n, &mut Rng::new(cfg.seed, 0).derive(MATRIX_LABEL))
}

/// The fixed support of size `s` used by the boosted and ReMBo kinds.
pub fn fixed_support(cfg: &ExperimentConfig, s: usize) -> SupportSet {
    Rng::new(cfg.seed, 0).derive(cell_label(SUPPORT_LABEL, s, 0)).support(cfg.n, s)
}

/// Runs the experiment and writes `results.csv`, `config.echo.json` and
/// `plot.svg` (plus kind-specific tables) to `cfg.output_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput, ExperimentError> {
    cfg.validate().map_err(|e| ExperimentError::Setup(e.to_string()))?;
    let dir = cfg.output_dir.clone();
    fs::create_dir_all(&dir).map_err(|source| IoError::File { path: dir.display().to_string(), source })?;
    let pool = pool()?;
    let mut out =
        ExperimentOutput { rows: Vec::new(), trials_run: 0, numeric_failures: 0, aborted: false, files: Vec::new() };
    let mut extra: Vec<(String, String)> = Vec::new();
    pool.install(|| -> Result<(), ExperimentError> {
        match cfg.kind {
            ExperimentKind::CndTable => cnd_rows(cfg, &mut out),
            ExperimentKind::PatternSampling => pattern_rows(cfg, &mut out, &mut extra)?,
            ExperimentKind::Triangles => triangle_rows(cfg, &mut out)?,
            ExperimentKind::SmvSweep | ExperimentKind::L11VsL12 => sweep_rows(cfg, &mut out)?,
            ExperimentKind::Boosted | ExperimentKind::Rembo => fixed_support_rows(cfg, &mut out, &mut extra)?,
        }
        Ok(())
    })?;

    let echo = dir.join("config.echo.json");
    io::write_text(&echo, &cfg.to_json())?;
    let results = dir.join("results.csv");
    io::write_text(&results, &results_table(cfg.kind, &out.rows).render())?;
    out.files.extend([echo, results]);
    for (name, text) in extra {
        let path = dir.join(name);
        io::write_text(&path, &text)?;
        out.files.push(path);
    }
    match plot_rows(cfg, &out.rows) {
        Ok(svg) => {
            let path = dir.join("plot.svg");
            io::write_text(&path, &svg)?;
            out.files.push(path);
        }
        Err(PlotError::EmptySeries) if out.aborted => {}
        Err(e) => return Err(e.into()),
    }
    Ok(out)
}

/// Records a finished cell and reports whether the run must stop.
fn account(out: &mut ExperimentOutput, trials: u64, failures: u64) -> bool {
    out.trials_run += trials;
    out.numeric_failures += failures;
    out.aborted = out.numeric_failures as f64 > MAX_NUMERIC_FAILURE_RATE * out.trials_run as f64;
    out.aborted
}

fn cnd_rows(cfg: &ExperimentConfig, out: &mut ExperimentOutput) {
    for n in 1..=cfg.cnd_max {
        for d in 1..=cfg.cnd_max {
            out.rows.push(ResultRow::Cnd(CndRow { n, d, value: cnd(n, d) }));
        }
    }
}

fn pattern_rows(
    cfg: &ExperimentConfig,
    out: &mut ExperimentOutput,
    extra: &mut Vec<(String, String)>,
) -> Result<(), ExperimentError> {
    const CHUNK: u64 = 1 << 14;
    for &r in &cfg.r_values {
        let base = Rng::new(cfg.seed, 0).derive(cell_label(MATRIX_LABEL, cfg.m, r));
        let xbar = gaussian_matrix(cfg.m, r, &mut base.clone());
        let sampler = base.derive(WEIGHTS_LABEL);
        let chunks: Vec<u64> = (0..cfg.trials.div_ceil(CHUNK)).collect();
        let parts = chunks
            .par_iter()
            .map(|&c| sample_sign_patterns_range(&xbar, c * CHUNK..((c + 1) * CHUNK).min(cfg.trials), &sampler))
            .collect::<Result<Vec<_>, _>>()?;
        let mut stats = PatternStats::empty(cfg.m, r);
        for p in &parts {
            stats.merge(p)?;
        }
        let max_pairs = cnd(cfg.m as u64, r as u64) / 2u32;
        for (t, unique_pairs) in stats.new_per_iteration() {
            out.rows.push(ResultRow::Saturation(SaturationRow {
                r,
                trials: t,
                unique_pairs,
                max_pairs: max_pairs.clone(),
            }));
        }
        extra.push((format!("patterns_r{r}.csv"), io::pattern_stats_table(&stats).render()));
        out.trials_run += cfg.trials;
    }
    Ok(())
}

struct TrialResult {
    recovered: Vec<bool>,
    numeric_failure: bool,
}

fn has_numeric_failure(rep: &PipelineReport) -> bool {
    rep.per_iteration.iter().any(|d| d.status == Some(SolveStatus::NumericFailure))
}

fn sweep_rows(cfg: &ExperimentConfig, out: &mut ExperimentOutput) -> Result<(), ExperimentError> {
    let a = experiment_matrix(cfg);
    let solver = cfg.tolerances.solver();
    let r_values = if cfg.kind == ExperimentKind::SmvSweep { vec![1] } else { cfg.r_values.clone() };
    let methods: &[&'static str] = if cfg.kind == ExperimentKind::SmvSweep { &["l1"] } else { &["l11", "l12"] };
    for &r in &r_values {
        for &s in &cfg.s_values {
            let label = cell_label(1, s, r);
            let results = (0..cfg.trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = Rng::new(cfg.seed, t).derive(label);
                    let support = rng.support(cfg.n, s);
                    let inst = ProblemInstance::gaussian_on_support(a.clone(), &support, r, &mut rng);
                    sweep_trial(cfg.kind, &inst, &solver)
                })
                .collect::<Result<Vec<_>, _>>()?;
            if push_cell(out, methods, s, r, &results, |_| None) {
                return Ok(());
            }
        }
    }
    Ok(())
}

fn sweep_trial(
    kind: ExperimentKind,
    inst: &ProblemInstance,
    solver: &SolverSettings,
) -> Result<TrialResult, ExperimentError> {
    if kind == ExperimentKind::SmvSweep {
        let x0 = inst.x0.column(0);
        let rep = solve_bp(&inst.a, &inst.b.column(0), solver)?;
        return Ok(TrialResult {
            recovered: vec![max_abs_diff(&rep.x, &x0) <= solver.recovery_tol],
            numeric_failure: rep.status == SolveStatus::NumericFailure,
        });
    }
    let l11 = solve_l11(&inst.a, &inst.b, solver)?;
    let l12 = solve_l12(&inst.a, &inst.b, solver)?;
    Ok(TrialResult {
        recovered: vec![l11.recovers(&inst.x0, solver.recovery_tol), l12.recovers(&inst.x0, solver.recovery_tol)],
        numeric_failure: [l11.status, l12.status].contains(&SolveStatus::NumericFailure),
    })
}

/// Appends one rate row per method; returns true when the run must stop.
fn push_cell(
    out: &mut ExperimentOutput,
    methods: &[&'static str],
    s: usize,
    r: usize,
    results: &[TrialResult],
    model: impl Fn(usize) -> Option<f64>,
) -> bool {
    let trials = results.len() as u64;
    let failures = results.iter().filter(|t| t.numeric_failure).count() as u64;
    for (k, &method) in methods.iter().enumerate() {
        let successes = results.iter().filter(|t| t.recovered[k]).count() as u64;
        let mut row = RateRow::new(method, s, r, successes, trials);
        row.model_rate = model(k);
        row.numeric_failures = failures;
        out.rows.push(ResultRow::Rate(row));
    }
    account(out, trials, failures)
}

/// Exhaustive face count on `support`, split across workers.
pub fn parallel_face_count(
    a: &DenseMatrix,
    support: &SupportSet,
    settings: &SolverSettings,
) -> Result<FaceCount, AnalysisError> {
    const CHUNK: u64 = 32;
    let n = 1u64 << (support.len().max(1) - 1);
    let chunks: Vec<u64> = (0..n.div_ceil(CHUNK)).collect();
    let parts = chunks
        .par_iter()
        .map(|&c| face_count_range(a, support, c * CHUNK..((c + 1) * CHUNK).min(n), settings))
        .collect::<Result<Vec<_>, _>>()?;
    let mut it = parts.into_iter();
    let mut fc = it.next().expect("at least one chunk");
    for p in it {
        fc.merge(&p)?;
    }
    Ok(fc)
}

fn fixed_support_rows(
    cfg: &ExperimentConfig,
    out: &mut ExperimentOutput,
    extra: &mut Vec<(String, String)>,
) -> Result<(), ExperimentError> {
    let a = experiment_matrix(cfg);
    let pipeline = cfg.tolerances.pipeline();
    let threshold = support_threshold(cfg.m, pipeline.threshold_override);
    for &s in &cfg.s_values {
        let support = fixed_support(cfg, s);
        let fc = parallel_face_count(&a, &support, &pipeline.solver)?;
        extra.push((format!("facecount_s{s}.csv"), io::face_count_table(&fc).render()));
        let p = prob_l1(&fc);
        for &r in &cfg.r_values {
            let label = cell_label(2, s, r);
            let results = (0..cfg.trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = Rng::new(cfg.seed, t).derive(label);
                    let inst = ProblemInstance::gaussian_on_support(a.clone(), &support, r, &mut rng);
                    let mut weights = rng.derive(WEIGHTS_LABEL);
                    fixed_support_trial(cfg, &inst, &fc, &pipeline, threshold, &mut weights)
                })
                .collect::<Result<Vec<_>, _>>()?;
            let stop = if cfg.kind == ExperimentKind::Boosted {
                let rk = r as u32;
                push_cell(out, &["boosted", "l11"], s, r, &results, |k| {
                    Some(if k == 0 { prob_boosted(p, rk) } else { prob_l11(p, rk) })
                })
            } else {
                let model = prob_rembo(&fc.surviving, &fc.total, s as u64, r as u64);
                push_cell(out, &["rembo"], s, r, &results, |_| Some(model))
            };
            if stop {
                return Ok(());
            }
        }
    }
    Ok(())
}

fn fixed_support_trial(
    cfg: &ExperimentConfig,
    inst: &ProblemInstance,
    fc: &FaceCount,
    pipeline: &PipelineSettings,
    threshold: usize,
    weights: &mut Rng,
) -> Result<TrialResult, ExperimentError> {
    let tol = pipeline.solver.recovery_tol;
    match (cfg.kind, cfg.use_face_cache) {
        (ExperimentKind::Boosted, true) => Ok(TrialResult {
            recovered: vec![boosted_l1_cached(fc, &inst.x0, threshold)?.recovered, l11_cached(fc, &inst.x0)?],
            numeric_failure: false,
        }),
        (ExperimentKind::Boosted, false) => {
            let boosted = boosted_l1(&inst.a, &inst.b, pipeline)?;
            let l11 = solve_l11(&inst.a, &inst.b, &pipeline.solver)?;
            Ok(TrialResult {
                recovered: vec![boosted_recovers(&boosted, &inst.x0, tol), l11.recovers(&inst.x0, tol)],
                numeric_failure: has_numeric_failure(&boosted) || l11.status == SolveStatus::NumericFailure,
            })
        }
        (_, true) => Ok(TrialResult {
            recovered: vec![rembo_l1_cached(fc, &inst.x0, cfg.max_iterations, weights, threshold)?.recovered],
            numeric_failure: false,
        }),
        (_, false) => {
            let rep = rembo_l1(&inst.a, &inst.b, cfg.max_iterations, weights, pipeline)?;
            Ok(TrialResult {
                recovered: vec![boosted_recovers(&rep, &inst.x0, tol)],
                numeric_failure: has_numeric_failure(&rep),
            })
        }
    }
}

fn boosted_recovers(rep: &PipelineReport, x0: &DenseMatrix, tol: f64) -> bool {
    rep.x().and_then(|x| x.max_abs_diff(x0)).is_some_and(|d| d <= tol)
}

/// Labeled corner vectors of a triangle, given by their values on `I`.
#[derive(Debug, Clone, PartialEq)]
pub struct Corner {
    pub label: String,
    pub values: Vec<f64>,
}

/// For every triangle of corners, solves ℓ1,2 and ℓ1,1 on `B = A X₀ W` at
/// each point `W = diag(ω)` of a barycentric grid with `grid_density`
/// subdivisions per edge. Grid points are emitted in lexicographic order of
/// `(i, j)` with `ω = (i, j, g − i − j) / g`.
pub fn run_triangles(
    a: &DenseMatrix,
    support: &SupportSet,
    triangles: &[[Corner; 3]],
    grid_density: usize,
    settings: &SolverSettings,
) -> Result<Vec<TriangleRow>, ExperimentError> {
    if grid_density < 2 {
        return Err(ExperimentError::Setup("grid_density must be at least 2".into()));
    }
    if support.ambient() != a.cols() {
        return Err(ExperimentError::Setup("support does not match the columns of A".into()));
    }
    let g = grid_density;
    let grid: Vec<[usize; 3]> = (0..=g).flat_map(|i| (0..=g - i).map(move |j| [i, j, g - i - j])).collect();
    let mut rows = Vec::new();
    for tri in triangles {
        if tri.iter().any(|c| c.values.len() != support.len()) {
            return Err(ExperimentError::Setup(format!("corner values of {} must match |I|", tri[0].label)));
        }
        let name = tri.iter().map(|c| c.label.as_str()).collect::<Vec<_>>().join("-");
        let cols: Vec<Vec<f64>> = tri.iter().map(|c| support.scatter(&c.values)).collect();
        let part = grid
            .par_iter()
            .map(|ijk| {
                let w = ijk.map(|k| k as f64 / g as f64);
                let scaled: Vec<Vec<f64>> =
                    cols.iter().zip(w).map(|(c, wk)| c.iter().map(|v| v * wk).collect()).collect();
                let x0 = DenseMatrix::from_columns(&scaled).expect("equal length columns");
                let b = a.matmul(&x0).expect("x0 has one row per column of A");
                let l12 = solve_l12(a, &b, settings)?;
                let l11 = solve_l11(a, &b, settings)?;
                Ok(TriangleRow {
                    triangle: name.clone(),
                    weights: w,
                    l12_recovered: l12.recovers(&x0, settings.recovery_tol),
                    l11_recovered: l11.recovers(&x0, settings.recovery_tol),
                })
            })
            .collect::<Result<Vec<_>, ExperimentError>>()?;
        rows.extend(part);
    }
    Ok(rows)
}

/// Vectors basis pursuit recovers, and vectors it does not.
pub type Classified = (Vec<Vec<f64>>, Vec<Vec<f64>>);

/// Draws Gaussian vectors on `support` until `want` of them are recovered by
/// basis pursuit and `want` are not, giving up after `budget` draws.
pub fn classify_vectors(
    a: &DenseMatrix,
    support: &SupportSet,
    want: usize,
    budget: usize,
    rng: &mut Rng,
    settings: &SolverSettings,
) -> Result<Classified, ExperimentError> {
    let (mut good, mut bad) = (Vec::new(), Vec::new());
    for _ in 0..budget {
        if good.len() >= want && bad.len() >= want {
            break;
        }
        let v = rng.normal_vec(support.len());
        let x0 = support.scatter(&v);
        let rep = solve_bp(a, &a.mul_vec(&x0), settings)?;
        let ok = max_abs_diff(&rep.x, &x0) <= settings.recovery_tol;
        let bucket = if ok { &mut good } else { &mut bad };
        if bucket.len() < want {
            bucket.push(v);
        }
    }
    Ok((good, bad))
}

fn triangle_rows(cfg: &ExperimentConfig, out: &mut ExperimentOutput) -> Result<(), ExperimentError> {
    let a = experiment_matrix(cfg);
    let solver = cfg.tolerances.solver();
    let s = cfg.s_values[0];
    let mut rng = Rng::new(cfg.seed, 0).derive(cell_label(3, s, 0));
    let support = rng.support(cfg.n, s);
    let (good, bad) = classify_vectors(&a, &support, 3, 2000, &mut rng, &solver)?;
    let corner =
        |prefix: &str, k: usize, v: &Vec<f64>| Corner { label: format!("{prefix}{}", k + 1), values: v.clone() };
    let mut triangles = Vec::new();
    for n_bad in 0..=3usize {
        let n_good = 3 - n_bad;
        if good.len() < n_good || bad.len() < n_bad {
            continue;
        }
        let corners: Vec<Corner> = good[..n_good]
            .iter()
            .enumerate()
            .map(|(k, v)| corner("s", k, v))
            .chain(bad[..n_bad].iter().enumerate().map(|(k, v)| corner("f", k, v)))
            .collect();
        triangles.push(<[Corner; 3]>::try_from(corners).expect("three corners"));
    }
    if triangles.is_empty() {
        return Err(ExperimentError::Setup("no triangle could be formed on the drawn support".into()));
    }
    let rows = run_triangles(&a, &support, &triangles, cfg.grid_density, &solver)?;
    out.trials_run += rows.len() as u64;
    out.rows.extend(rows.into_iter().map(ResultRow::Triangle));
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// The `results.csv` table of a run.
pub fn results_table(kind: ExperimentKind, rows: &[ResultRow]) -> CsvTable {
    let header: &[&str] = match kind {
        ExperimentKind::CndTable => &["n", "d", "cnd"],
        ExperimentKind::PatternSampling => &["r", "trials", "unique_pairs", "max_pairs"],
        ExperimentKind::Triangles => &["triangle", "w1", "w2", "w3", "l12_recovered", "l11_recovered"],
        _ => &[
            "method",
            "s",
            "r",
            "trials",
            "successes",
            "empirical_rate",
            "ci_halfwidth",
            "model_rate",
            "numeric_failures",
        ],
    };
    let mut t = CsvTable::new(header);
    for row in rows {
        t.push(match row {
            ResultRow::Cnd(c) => vec![c.n.to_string(), c.d.to_string(), c.value.to_string()],
            ResultRow::Saturation(p) => {
                vec![p.r.to_string(), p.trials.to_string(), p.unique_pairs.to_string(), p.max_pairs.to_string()]
            }
            ResultRow::Triangle(p) => vec![
                p.triangle.clone(),
                fmt_f64(p.weights[0]),
                fmt_f64(p.weights[1]),
                fmt_f64(p.weights[2]),
                p.l12_recovered.to_string(),
                p.l11_recovered.to_string(),
            ],
            ResultRow::Rate(r) => vec![
                r.method.to_string(),
                r.s.to_string(),
                r.r.to_string(),
                r.trials.to_string(),
                r.successes.to_string(),
                fmt_f64(r.empirical_rate),
                fmt_f64(r.ci_halfwidth),
                opt(r.model_rate),
                r.numeric_failures.to_string(),
            ],
        });
    }
    t
}

/// Groups `(key, x, y)` triples into series in first-seen key order.
fn group(points: impl Iterator<Item = (String, f64, f64)>, dashed: bool) -> Vec<Series> {
    let mut out: Vec<Series> = Vec::new();
    for (key, x, y) in points {
        match out.iter_mut().find(|s| s.name == key) {
            Some(s) => s.points.push((x, y)),
            None => {
                let s = Series::new(key, vec![(x, y)]);
                out.push(if dashed { s.dashed() } else { s });
            }
        }
    }
    out
}

fn plot_rows(cfg: &ExperimentConfig, rows: &[ResultRow]) -> Result<String, PlotError> {
    let mut axes = Axes { title: format!("{} (m={}, n={})", cfg.kind.name(), cfg.m, cfg.n), ..Default::default() };
    let series = match cfg.kind {
        ExperimentKind::CndTable => {
            axes.title = "C(n, d) / 2^n".into();
            axes.x_label = "n".into();
            axes.y_label = "fraction of orthants".into();
            group(
                rows.iter().filter_map(|r| match r {
                    ResultRow::Cnd(c) if c.d <= 12 => Some((
                        format!("d={}", c.d),
                        c.n as f64,
                        jsrec_core::analysis::big_to_f64(&c.value) / 2f64.powi(c.n as i32),
                    )),
                    _ => None,
                }),
                false,
            )
        }
        ExperimentKind::PatternSampling => {
            axes.title = format!("unique sign patterns (m={})", cfg.m);
            axes.x_label = "draws".into();
            axes.y_label = "unique pairs".into();
            axes.log_x = true;
            group(
                rows.iter().filter_map(|r| match r {
                    ResultRow::Saturation(p) => Some((format!("r={}", p.r), p.trials as f64, p.unique_pairs as f64)),
                    _ => None,
                }),
                false,
            )
        }
        ExperimentKind::Triangles => {
            axes.x_label = "weight on third corner".into();
            axes.y_label = "l12 recovery fraction".into();
            axes.y_range = Some((0.0, 1.0));
            triangle_series(rows)
        }
        kind => {
            let by_r = matches!(kind, ExperimentKind::Boosted | ExperimentKind::Rembo);
            axes.x_label = if by_r { "r" } else { "s" }.into();
            axes.y_label = "recovery rate".into();
            axes.y_range = Some((0.0, 1.0));
            let rates: Vec<&RateRow> = rows
                .iter()
                .filter_map(|r| match r {
                    ResultRow::Rate(r) => Some(r),
                    _ => None,
                })
                .collect();
            let key =
                |r: &RateRow| if by_r { format!("{} s={}", r.method, r.s) } else { format!("{} r={}", r.method, r.r) };
            let x = |r: &RateRow| if by_r { r.r as f64 } else { r.s as f64 };
            let mut series = group(rates.iter().map(|r| (key(r), x(r), r.empirical_rate)), false);
            series.extend(group(
                rates.iter().filter_map(|r| r.model_rate.map(|m| (format!("{} (model)", key(r)), x(r), m))),
                true,
            ));
            series
        }
    };
    emit_plot(&series, &axes)
}

fn triangle_series(rows: &[ResultRow]) -> Vec<Series> {
    // per triangle: (third weight, recovered, points)
    type Bins = Vec<(f64, u32, u32)>;
    let mut tallies: Vec<(String, Bins)> = Vec::new();
    for row in rows {
        let ResultRow::Triangle(t) = row else { continue };
        let idx = match tallies.iter().position(|(n, _)| *n == t.triangle) {
            Some(i) => i,
            None => {
                tallies.push((t.triangle.clone(), Vec::new()));
                tallies.len() - 1
            }
        };
        let bins = &mut tallies[idx].1;
        let w = t.weights[2];
        let bin = match bins.iter().position(|b| b.0 == w) {
            Some(i) => i,
            None => {
                bins.push((w, 0, 0));
                bins.len() - 1
            }
        };
        bins[bin].1 += u32::from(t.l12_recovered);
        bins[bin].2 += 1;
    }
    tallies
        .into_iter()
        .map(|(name, mut bins)| {
            bins.sort_by(|a, b| a.0.total_cmp(&b.0));
            Series::new(name, bins.into_iter().map(|(w, ok, n)| (w, ok as f64 / n as f64)).collect())
        })
        .collect()
}
