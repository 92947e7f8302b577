//! Plain-text matrix files and CSV tables.
//!
//! A matrix file starts with a `# rows cols` header followed by one
//! comma-separated row per line. Entries are written with 17 significant
//! digits, which round-trips every `f64` exactly. Readers accept LF and CRLF.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use jsrec_core::analysis::FaceCount;
use jsrec_core::combinatorics::PatternStats;
use jsrec_core::{DenseMatrix, MatrixError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: String, source: io::Error },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn matrix_to_string(m: &DenseMatrix) -> String {
    let mut out = format!("# {} {}\n", m.rows(), m.cols());
    for i in 0..m.rows() {
        let line: Vec<String> = m.row(i).iter().map(|v| fmt_f64(*v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_matrix(text: &str) -> Result<DenseMatrix, IoError> {
    let mut lines = text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l)).enumerate();
    let (rows, cols) = loop {
        let Some((k, line)) = lines.next() else {
            return Err(IoError::Parse { line: 1, message: "missing `# rows cols` header".into() });
        };
        if line.trim().is_empty() {
            continue;
        }
        break parse_header(line)
            .ok_or_else(|| IoError::Parse { line: k + 1, message: "expected `# rows cols`".into() })?;
    };
    let mut data = Vec::with_capacity(rows * cols);
    let mut seen = 0;
    for (k, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let before = data.len();
        for field in line.split(',') {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| IoError::Parse { line: k + 1, message: format!("not a number: {field:?}") })?;
            data.push(v);
        }
        if data.len() - before != cols {
            return Err(IoError::Parse { line: k + 1, message: format!("expected {cols} entries") });
        }
        seen += 1;
    }
    if seen != rows {
        return Err(IoError::Parse { line: 1, message: format!("header declares {rows} rows, found {seen}") });
    }
    Ok(DenseMatrix::new(rows, cols, data)?)
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let rest = line.trim().strip_prefix('#')?;
    let mut it = rest.split_whitespace();
    let rows = it.next()?.parse().ok()?;
    let cols = it.next()?.parse().ok()?;
    it.next().is_none().then_some((rows, cols))
}

pub fn read_matrix(path: &Path) -> Result<DenseMatrix, IoError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::File { path: path.display().to_string(), source })?;
    parse_matrix(&text)
}

pub fn write_matrix(path: &Path, m: &DenseMatrix) -> Result<(), IoError> {
    write_text(path, &matrix_to_string(m))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    fs::write(path, text).map_err(|source| IoError::File { path: path.display().to_string(), source })
}

/// A CSV table with a header row and LF line endings. Fields are written
/// verbatim, so callers must not put commas in them.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.header.join(","));
        for r in &self.rows {
            let _ = writeln!(out, "{}", r.join(","));
        }
        out
    }
}

/// `pattern,count,first_seen`, one row per canonical pattern.
pub fn pattern_stats_table(stats: &PatternStats) -> CsvTable {
    let mut t = CsvTable::new(&["pattern", "count", "first_seen"]);
    for rec in stats.records() {
        t.push(vec![rec.pattern.to_sign_string(), rec.count.to_string(), rec.first_seen.to_string()]);
    }
    t
}

/// `pattern,recovered`, one row per evaluated canonical pattern.
pub fn face_count_table(fc: &FaceCount) -> CsvTable {
    let mut t = CsvTable::new(&["pattern", "recovered"]);
    for (p, ok) in &fc.per_pattern {
        t.push(vec![p.to_sign_string(), ok.to_string()]);
    }
    t
}
