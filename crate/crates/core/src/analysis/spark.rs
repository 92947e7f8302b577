use alloc::vec::Vec;

use crate::linalg::numerical_rank;
use crate::matrix::DenseMatrix;

/// Result of [`spark_bruteforce`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spark {
    /// Smallest number of dependent columns.
    Value(usize),
    /// The budget ran out; every column subset smaller than this is
    /// independent.
    AtLeast(usize),
    /// The columns are independent, so the kernel is `{0}`.
    Trivial,
}

/// Smallest `k` such that some `k` columns of `A` are linearly dependent,
/// found by testing subsets in order of increasing size. `budget` caps the
/// number of subsets whose rank is computed.
pub fn spark_bruteforce(a: &DenseMatrix, budget: u64) -> Spark {
    let n = a.cols();
    let rank = numerical_rank(a);
    if rank == n {
        return Spark::Trivial;
    }
    let mut tested = 0u64;
    // any rank + 1 columns are dependent
    for k in 1..=rank + 1 {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            if tested == budget {
                return Spark::AtLeast(k);
            }
            tested += 1;
            if numerical_rank(&a.select_columns(&idx)) < k {
                return Spark::Value(k);
            }
            if !next_combination(&mut idx, n) {
                break;
            }
        }
    }
    Spark::Value(rank + 1)
}

/// Advances `idx` to the next `k`-subset of `0..n` in lexicographic order.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
