use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use jsrec::experiment::parallel_face_count;
use jsrec::io::{self, fmt_f64};
use jsrec::{run_experiment, ExperimentConfig};
use jsrec_core::analysis::prob_l1;
use jsrec_core::bpsolve::solve_bp;
use jsrec_core::combinatorics::cnd;
use jsrec_core::mmv::solve_l12;
use jsrec_core::recover::{boosted_l1, rembo_l1, PipelineReport, PipelineSettings};
use jsrec_core::{DenseMatrix, Rng, SolveStatus, SolverSettings, SupportSet};

const OK: u8 = 0;
const NOT_RECOVERED: u8 = 1;
const USAGE: u8 = 2;
const NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(name = "jsrec", version, about = "Joint-sparse recovery solvers and experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Basis pursuit: min ‖x‖₁ subject to Ax = b.
    Solve(SolveArgs),
    /// Sum of row norms: min ‖X‖₁,₂ subject to AX = B.
    L12(SolveArgs),
    /// Boosted ℓ1 over the columns of B.
    Boost(SolveArgs),
    /// ReMBo-ℓ1 with random weights.
    Rembo {
        #[command(flatten)]
        io: SolveArgs,
        #[arg(long, default_value_t = 100)]
        max_iter: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Prints C(n, d).
    Cnd { n: u64, d: u64 },
    /// Counts the sign patterns on a support that basis pursuit recovers.
    Facecount {
        /// Comma-separated column indices.
        #[arg(long, value_delimiter = ',', required = true)]
        support: Vec<usize>,
        /// Matrix file; without it a Gaussian matrix is drawn from `--seed`.
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        rows: usize,
        #[arg(long, default_value_t = 80)]
        cols: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the `pattern,recovered` table here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs a JSON experiment config.
    Experiment { config: PathBuf },
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    rhs: PathBuf,
    /// Reference solution; the exit code then reports whether it was recovered.
    #[arg(long)]
    x0: Option<PathBuf>,
    /// Write the solution matrix here.
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Loaded {
    a: DenseMatrix,
    b: DenseMatrix,
    x0: Option<DenseMatrix>,
}

fn load(args: &SolveArgs) -> Result<Loaded, String> {
    let read = |p: &Path| io::read_matrix(p).map_err(|e| e.to_string());
    let a = read(&args.matrix)?;
    let b = read(&args.rhs)?;
    if b.rows() != a.rows() {
        return Err(format!("rhs has {} rows, matrix has {}", b.rows(), a.rows()));
    }
    let x0 = args.x0.as_deref().map(read).transpose()?;
    if let Some(x0) = &x0 {
        if x0.shape() != (a.cols(), b.cols()) {
            return Err(format!("x0 must be {}x{}", a.cols(), b.cols()));
        }
    }
    Ok(Loaded { a, b, x0 })
}

fn write_solution(out: &Option<PathBuf>, x: &DenseMatrix) -> Result<(), String> {
    match out {
        Some(p) => io::write_matrix(p, x).map_err(|e| e.to_string()),
        None => Ok(()),
    }
}

fn status_code(status: SolveStatus) -> u8 {
    match status {
        SolveStatus::Optimal => OK,
        SolveStatus::Infeasible => NOT_RECOVERED,
        SolveStatus::MaxIter | SolveStatus::NumericFailure => NUMERIC,
    }
}

/// With a reference solution the exit code reports recovery; otherwise it
/// reports the solver status.
fn verdict(status: SolveStatus, x: &DenseMatrix, x0: Option<&DenseMatrix>, tol: f64) -> u8 {
    let code = status_code(status);
    match x0 {
        Some(x0) if code == OK => {
            let recovered = x.max_abs_diff(x0).is_some_and(|d| d <= tol);
            println!("recovered: {recovered}");
            if recovered {
                OK
            } else {
                NOT_RECOVERED
            }
        }
        _ => code,
    }
}

fn run_solve(args: &SolveArgs) -> Result<u8, String> {
    let Loaded { a, b, x0 } = load(args)?;
    if b.cols() != 1 {
        return Err("solve expects a single right-hand side column".into());
    }
    let settings = SolverSettings::default();
    let rep = solve_bp(&a, &b.column(0), &settings).map_err(|e| e.to_string())?;
    println!("status: {:?}", rep.status);
    println!("objective: {}", fmt_f64(rep.objective()));
    println!("primal_residual: {}", fmt_f64(rep.primal_residual));
    println!("duality_gap: {}", fmt_f64(rep.duality_gap));
    println!("iterations: {}", rep.iterations);
    let x = DenseMatrix::column_vector(&rep.x).map_err(|e| e.to_string())?;
    write_solution(&args.out, &x)?;
    Ok(verdict(rep.status, &x, x0.as_ref(), settings.recovery_tol))
}

fn run_l12(args: &SolveArgs) -> Result<u8, String> {
    let Loaded { a, b, x0 } = load(args)?;
    let settings = SolverSettings::default();
    let rep = solve_l12(&a, &b, &settings).map_err(|e| e.to_string())?;
    println!("status: {:?}", rep.status);
    println!("objective: {}", fmt_f64(rep.x.norm_l12()));
    println!("primal_residual: {}", fmt_f64(rep.primal_residual));
    println!("duality_gap: {}", fmt_f64(rep.gap));
    println!("iterations: {}", rep.iterations);
    write_solution(&args.out, &rep.x)?;
    Ok(verdict(rep.status, &rep.x, x0.as_ref(), settings.recovery_tol))
}

fn report_pipeline(
    rep: &PipelineReport,
    x0: Option<&DenseMatrix>,
    out: &Option<PathBuf>,
    tol: f64,
) -> Result<u8, String> {
    println!("iterations_used: {}", rep.iterations_used);
    let numeric = rep.per_iteration.iter().any(|d| d.status == Some(SolveStatus::NumericFailure));
    match rep.x() {
        Some(x) => {
            println!("outcome: recovered");
            write_solution(out, x)?;
            Ok(verdict(SolveStatus::Optimal, x, x0, tol))
        }
        None if numeric => {
            println!("outcome: numeric failure");
            Ok(NUMERIC)
        }
        None => {
            println!("outcome: failure");
            Ok(NOT_RECOVERED)
        }
    }
}

fn run_facecount(
    support: Vec<usize>,
    matrix: Option<PathBuf>,
    (rows, cols, seed): (usize, usize, u64),
    out: Option<PathBuf>,
) -> Result<u8, String> {
    let a = match matrix {
        Some(p) => io::read_matrix(&p).map_err(|e| e.to_string())?,
        None => jsrec_core::rng::gaussian_matrix(rows, cols, &mut Rng::new(seed, 0)),
    };
    let support = SupportSet::new(support, a.cols()).map_err(|e| e.to_string())?;
    let fc = parallel_face_count(&a, &support, &SolverSettings::default()).map_err(|e| e.to_string())?;
    println!("support: {support}");
    println!("surviving: {}", fc.surviving);
    println!("total: {}", fc.total);
    println!("prob_l1: {}", fmt_f64(prob_l1(&fc)));
    if let Some(p) = out {
        io::write_text(&p, &io::face_count_table(&fc).render()).map_err(|e| e.to_string())?;
    }
    Ok(OK)
}

fn run_config(path: &Path) -> Result<u8, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let cfg = ExperimentConfig::from_json(&text).map_err(|e| e.to_string())?;
    let out = run_experiment(&cfg).map_err(|e| e.to_string())?;
    for f in &out.files {
        println!("wrote {}", f.display());
    }
    println!("trials: {}", out.trials_run);
    println!("numeric_failures: {}", out.numeric_failures);
    if out.aborted {
        eprintln!("numeric failure rate too high; results are partial");
        return Ok(NUMERIC);
    }
    Ok(OK)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let tol = SolverSettings::default().recovery_tol;
    let result = match cli.command {
        Command::Solve(args) => run_solve(&args),
        Command::L12(args) => run_l12(&args),
        Command::Boost(args) => load(&args).and_then(|l| {
            let rep = boosted_l1(&l.a, &l.b, &PipelineSettings::default()).map_err(|e| e.to_string())?;
            report_pipeline(&rep, l.x0.as_ref(), &args.out, tol)
        }),
        Command::Rembo { io, max_iter, seed } => load(&io).and_then(|l| {
            let mut rng = Rng::new(seed, 0);
            let rep =
                rembo_l1(&l.a, &l.b, max_iter, &mut rng, &PipelineSettings::default()).map_err(|e| e.to_string())?;
            report_pipeline(&rep, l.x0.as_ref(), &io.out, tol)
        }),
        Command::Cnd { n, d } => {
            if n == 0 || d == 0 {
                Err("n and d must be at least 1".into())
            } else {
                println!("{}", cnd(n, d));
                Ok(OK)
            }
        }
        Command::Facecount { support, matrix, rows, cols, seed, out } => {
            run_facecount(support, matrix, (rows, cols, seed), out)
        }
        Command::Experiment { config } => run_config(&config),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(USAGE)
        }
    }
}
