//! Orthant-intersection counts, sign-pattern sampling and mutual coherence.
//!
//! `C(n, d)` is the largest number of orthants of `Rⁿ` whose interiors a
//! `d`-dimensional subspace can meet. For `X̄` of size `s x r` in general
//! position, the vectors `X̄w` reach exactly `C(s, r)` orthants, i.e.
//! `C(s, r)/2` sign patterns up to negation. [`sample_sign_patterns`] measures
//! how quickly random weights `w` discover them.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::ops::Range;

use num_bigint::BigUint;
use thiserror::Error;

use crate::matrix::{dot, norm2, DenseMatrix};
use crate::rng::Rng;
use crate::support::{SignPattern, SupportSet, DEFAULT_ZERO_TOL};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CombinatoricsError {
    #[error("row {0} of the matrix is identically zero")]
    DegenerateRow(usize),
    #[error("column {0} of the matrix is identically zero")]
    ZeroColumn(usize),
    #[error("at least two columns are required")]
    TooFewColumns,
    #[error("{0} rows exceed the 64-row limit for pattern keys")]
    TooManyRows(usize),
    #[error("at least one trial is required")]
    NoTrials,
    #[error("pattern support does not cover the rows of the matrix")]
    PatternMismatch,
    #[error("statistics with different shapes cannot be merged")]
    ShapeMismatch,
}

/// `n choose k` exactly.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::ZERO;
    }
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `C(n, d) = 2 Σ_{i<d} (n−1 choose i)`, which is `2ⁿ` once `d ≥ n`.
///
/// # Panics
/// If `n` or `d` is zero.
pub fn cnd(n: u64, d: u64) -> BigUint {
    assert!(n >= 1 && d >= 1, "cnd needs n, d >= 1");
    let top = d.min(n);
    let sum: BigUint = (0..top).map(|i| binomial(n - 1, i)).sum();
    sum * 2u32
}

/// Canonical pattern key: bit `i − 1` is set when the sign at position `i`
/// differs from the sign at position 0. This matches
/// [`SignPattern::canonical_from_index`].
fn pattern_key(v: &[f64]) -> u64 {
    let lead = v[0] < 0.0;
    v.iter().skip(1).enumerate().fold(0u64, |acc, (i, x)| if (*x < 0.0) != lead { acc | (1 << i) } else { acc })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Entry {
    count: u64,
    first_seen: u64,
}

/// Counts of canonical sign patterns reached by `X̄w` over a range of trials.
///
/// Trial `t` draws its weights from stream `t` of the generator seed, so a
/// run over `0..N` equals the [`merge`](Self::merge) of runs over any
/// partition of `0..N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternStats {
    rows: usize,
    cols: usize,
    trials: u64,
    discarded: u64,
    patterns: BTreeMap<u64, Entry>,
}

/// One line of the pattern table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternRecord {
    pub pattern: SignPattern,
    pub count: u64,
    pub first_seen: u64,
}

impl PatternStats {
    pub fn empty(rows: usize, cols: usize) -> Self {
        Self { rows, cols, trials: 0, discarded: 0, patterns: BTreeMap::new() }
    }

    /// Number of draws that produced a pattern.
    pub fn trials(&self) -> u64 {
        self.trials
    }

    /// Draws thrown away because an entry of `X̄w` was at or below the zero
    /// tolerance.
    pub fn discarded(&self) -> u64 {
        self.discarded
    }

    pub fn unique_pairs(&self) -> usize {
        self.patterns.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn count(&self, pattern: &SignPattern) -> u64 {
        self.lookup(pattern).map_or(0, |e| e.count)
    }

    pub fn first_seen(&self, pattern: &SignPattern) -> Option<u64> {
        self.lookup(pattern).map(|e| e.first_seen)
    }

    fn lookup(&self, pattern: &SignPattern) -> Option<&Entry> {
        if pattern.support().len() != self.rows {
            return None;
        }
        let signs = pattern.signs_f64();
        self.patterns.get(&pattern_key(&signs))
    }

    /// All patterns in key order.
    pub fn records(&self) -> Vec<PatternRecord> {
        let support = SupportSet::full(self.rows);
        self.patterns
            .iter()
            .map(|(&k, e)| PatternRecord {
                pattern: SignPattern::canonical_from_index(support.clone(), k).expect("rows checked at construction"),
                count: e.count,
                first_seen: e.first_seen,
            })
            .collect()
    }

    /// `(t, unique patterns among trials < t)` at `t = 1, 2, …, 9, 10, 20, …`
    /// up to the last trial index seen.
    pub fn new_per_iteration(&self) -> Vec<(u64, usize)> {
        let mut firsts: Vec<u64> = self.patterns.values().map(|e| e.first_seen).collect();
        firsts.sort_unstable();
        let end = self.patterns.values().map(|e| e.first_seen + 1).max().unwrap_or(0).max(self.trials + self.discarded);
        let mut out = Vec::new();
        for t in checkpoints(end) {
            out.push((t, firsts.partition_point(|&f| f < t)));
        }
        out
    }

    /// Pointwise union: counts add, first sightings take the minimum.
    pub fn merge(&mut self, other: &PatternStats) -> Result<(), CombinatoricsError> {
        if self.shape() != other.shape() {
            return Err(CombinatoricsError::ShapeMismatch);
        }
        self.trials += other.trials;
        self.discarded += other.discarded;
        for (&k, e) in &other.patterns {
            self.patterns
                .entry(k)
                .and_modify(|mine| {
                    mine.count += e.count;
                    mine.first_seen = mine.first_seen.min(e.first_seen);
                })
                .or_insert(*e);
        }
        Ok(())
    }
}

/// `1..=9, 10, 20, …, 90, 100, …` capped by (and ending at) `end`.
fn checkpoints(end: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut scale = 1u64;
    'outer: loop {
        for d in 1..10 {
            let t = d * scale;
            if t >= end {
                break 'outer;
            }
            out.push(t);
        }
        scale = match scale.checked_mul(10) {
            Some(s) => s,
            None => break,
        };
    }
    if end > 0 {
        out.push(end);
    }
    out
}

fn check_rows(xbar: &DenseMatrix) -> Result<(), CombinatoricsError> {
    if xbar.rows() > 64 {
        return Err(CombinatoricsError::TooManyRows(xbar.rows()));
    }
    match (0..xbar.rows()).find(|&i| xbar.row(i).iter().all(|v| *v == 0.0)) {
        Some(i) => Err(CombinatoricsError::DegenerateRow(i)),
        None => Ok(()),
    }
}

/// Samples `trials` weight vectors `w ~ N(0, I_r)` and records the canonical
/// sign pattern of `X̄w`. Trial `t` uses stream `t` of `rng`'s seed; the
/// stream of `rng` itself is not used.
pub fn sample_sign_patterns(xbar: &DenseMatrix, trials: u64, rng: &Rng) -> Result<PatternStats, CombinatoricsError> {
    if trials == 0 {
        return Err(CombinatoricsError::NoTrials);
    }
    sample_sign_patterns_range(xbar, 0..trials, rng)
}

/// The trials `range` of [`sample_sign_patterns`]; partitions merge back to
/// the full run.
pub fn sample_sign_patterns_range(
    xbar: &DenseMatrix,
    range: Range<u64>,
    rng: &Rng,
) -> Result<PatternStats, CombinatoricsError> {
    check_rows(xbar)?;
    let (s, r) = xbar.shape();
    let mut stats = PatternStats::empty(s, r);
    let mut v = alloc::vec![0.0; s];
    for t in range {
        let mut trng = rng.with_stream(t);
        let w = trng.normal_vec(r);
        for (i, vi) in v.iter_mut().enumerate() {
            *vi = dot(xbar.row(i), &w);
        }
        if v.iter().any(|x| x.abs() <= DEFAULT_ZERO_TOL) {
            stats.discarded += 1;
            continue;
        }
        stats.trials += 1;
        stats.patterns.entry(pattern_key(&v)).and_modify(|e| e.count += 1).or_insert(Entry { count: 1, first_seen: t });
    }
    Ok(stats)
}

/// Monte-Carlo estimate of `Pr[canonical sign(X̄w) = pattern]` with its
/// binomial standard error. The pattern must live on all rows of `X̄`.
pub fn estimate_pattern_probability(
    xbar: &DenseMatrix,
    pattern: &SignPattern,
    trials: u64,
    rng: &Rng,
) -> Result<(f64, f64), CombinatoricsError> {
    if *pattern.support() != SupportSet::full(xbar.rows()) {
        return Err(CombinatoricsError::PatternMismatch);
    }
    let stats = sample_sign_patterns(xbar, trials, rng)?;
    let n = stats.trials() as f64;
    if n == 0.0 {
        return Ok((0.0, 0.0));
    }
    let p = stats.count(pattern) as f64 / n;
    Ok((p, (p * (1.0 - p) / n).sqrt()))
}

/// Extremes of `|x_iᵀx_j| / (‖x_i‖‖x_j‖)` over distinct column pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coherence {
    /// Minimum over pairs.
    pub min: f64,
    /// Maximum over pairs, the more common definition.
    pub max: f64,
}

pub fn mutual_coherence(x: &DenseMatrix) -> Result<Coherence, CombinatoricsError> {
    let n = x.cols();
    if n < 2 {
        return Err(CombinatoricsError::TooFewColumns);
    }
    let cols: Vec<Vec<f64>> = (0..n).map(|j| x.column(j)).collect();
    let norms: Vec<f64> = cols.iter().map(|c| norm2(c)).collect();
    if let Some(j) = norms.iter().position(|v| *v == 0.0) {
        return Err(CombinatoricsError::ZeroColumn(j));
    }
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..n {
        for j in i + 1..n {
            let c = (dot(&cols[i], &cols[j]) / (norms[i] * norms[j])).abs().min(1.0);
            lo = lo.min(c);
            hi = hi.max(c);
        }
    }
    Ok(Coherence { min: lo, max: hi })
}
