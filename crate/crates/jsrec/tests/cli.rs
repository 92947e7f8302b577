use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use jsrec::io::{matrix_to_string, read_matrix};
use jsrec_core::rng::gaussian_matrix;
use jsrec_core::{DenseMatrix, ProblemInstance, Rng, SupportSet};

fn jsrec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jsrec")).args(args).env("JSREC_THREADS", "2").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch_dir(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("jsrec-cli-{name}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn write(dir: &Path, name: &str, m: &DenseMatrix) -> String {
    let p = dir.join(name);
    fs::write(&p, matrix_to_string(m)).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn cnd_prints_exact_value() {
    let o = jsrec(&["cnd", "12", "6"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), jsrec_core::combinatorics::cnd(12, 6).to_string());
    assert_eq!(jsrec(&["cnd", "0", "1"]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(jsrec(&[]).status.code(), Some(2));
    assert_eq!(
        jsrec(&["solve", "--matrix", "/nonexistent/a.csv", "--rhs", "/nonexistent/b.csv"]).status.code(),
        Some(2)
    );
    assert_eq!(jsrec(&["bogus"]).status.code(), Some(2));
}

#[test]
fn solve_reports_recovery_through_exit_code() {
    let dir = scratch_dir("solve");
    let a = DenseMatrix::from_rows(&[[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]]).unwrap();
    let am = write(&dir, "a.csv", &a);
    // Opposite signs on the first two columns are recovered, equal signs are not.
    for (x0, code) in [([1.0, -2.0, 0.0], 0), ([1.0, 2.0, 0.0], 1)] {
        let x0m = DenseMatrix::column_vector(&x0).unwrap();
        let b = write(&dir, "b.csv", &a.matmul(&x0m).unwrap());
        let xp = write(&dir, "x0.csv", &x0m);
        let out = dir.join("x.csv");
        let o = jsrec(&["solve", "--matrix", &am, "--rhs", &b, "--x0", &xp, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(code), "{}", stdout(&o));
        assert!(stdout(&o).contains("status: Optimal"));
        assert_eq!(read_matrix(&out).unwrap().shape(), (3, 1));
    }
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn mmv_subcommands_recover_easy_instance() {
    let dir = scratch_dir("mmv");
    let mut rng = Rng::new(4, 0);
    let a = gaussian_matrix(12, 24, &mut rng);
    let inst = ProblemInstance::gaussian_on_support(a, &SupportSet::new(vec![2, 9], 24).unwrap(), 3, &mut rng);
    let am = write(&dir, "a.csv", &inst.a);
    let bm = write(&dir, "b.csv", &inst.b);
    let xm = write(&dir, "x0.csv", &inst.x0);
    for args in [
        vec!["l12", "--matrix", &am, "--rhs", &bm, "--x0", &xm],
        vec!["boost", "--matrix", &am, "--rhs", &bm, "--x0", &xm],
        vec!["rembo", "--matrix", &am, "--rhs", &bm, "--x0", &xm, "--max-iter", "5", "--seed", "3"],
    ] {
        let o = jsrec(&args);
        assert_eq!(o.status.code(), Some(0), "{:?}: {}", args[0], stdout(&o));
    }
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn facecount_on_generated_matrix() {
    let dir = scratch_dir("fc");
    let out = dir.join("fc.csv");
    let o = jsrec(&["facecount", "--support", "0,3,7", "--rows", "10", "--cols", "20", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("total: 8"));
    let table = fs::read_to_string(&out).unwrap();
    assert_eq!(table.lines().count(), 5);
    assert!(table.starts_with("pattern,recovered\n"));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn experiment_config_errors_exit_2() {
    let dir = scratch_dir("badcfg");
    let cfg = dir.join("c.json");
    let out = dir.join("out");
    let base = format!(
        r#"{{"schema_version": 1, "kind": "cnd_table", "trials": 1, "seed": 0, "output_dir": {:?}}}"#,
        out.to_str().unwrap()
    );
    fs::write(&cfg, &base).unwrap();
    assert_eq!(jsrec(&["experiment", cfg.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(fs::read_to_string(out.join("results.csv")).unwrap().lines().count(), 145);
    for bad in [
        base.replace("\"seed\": 0", "\"seed\": 0, \"extra\": 1"),
        base.replace("\"trials\": 1", "\"trials\": 0"),
        "{".into(),
    ] {
        fs::write(&cfg, bad).unwrap();
        assert_eq!(jsrec(&["experiment", cfg.to_str().unwrap()]).status.code(), Some(2));
    }
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let dir = scratch_dir("threads");
    let mut csv = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.join(format!("out{threads}"));
        let cfg = dir.join(format!("c{threads}.json"));
        let text = format!(
            r#"{{"schema_version": 1, "kind": "rembo", "m": 10, "n": 30, "r_values": [1, 3], "s_values": [3],
               "trials": 40, "seed": 8, "max_iterations": 3, "use_face_cache": false, "output_dir": {:?}}}"#,
            out.to_str().unwrap()
        );
        fs::write(&cfg, text).unwrap();
        let o = Command::new(env!("CARGO_BIN_EXE_jsrec"))
            .args(["experiment", cfg.to_str().unwrap()])
            .env("JSREC_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        csv.push(fs::read(out.join("results.csv")).unwrap());
        assert!(out.join("plot.svg").exists() && out.join("facecount_s3.csv").exists());
    }
    assert_eq!(csv[0], csv[1]);
    fs::remove_dir_all(&dir).unwrap();
}
