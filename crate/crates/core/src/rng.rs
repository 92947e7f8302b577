//! Counter-based seeded random numbers.
//!
//! [`Rng`] is ChaCha8 keyed by a 64-bit seed with a 64-bit stream id. The
//! `k`-th draw depends only on `(seed, stream, k)`, so per-trial streams can be
//! evaluated in any order or in parallel with identical results.

use alloc::vec::Vec;

use rand::seq::index;
use rand::{Rng as _, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matrix::DenseMatrix;
use crate::support::SupportSet;

#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { seed, stream, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// A fresh generator on another stream of the same seed.
    pub fn with_stream(&self, stream: u64) -> Self {
        Self::new(self.seed, stream)
    }

    /// A generator keyed by a seed derived from this one and `label`, keeping
    /// the stream id. Used to give independent purposes (matrix, supports,
    /// weights) non-overlapping randomness within one trial.
    pub fn derive(&self, label: u64) -> Self {
        Self::new(splitmix64(self.seed ^ splitmix64(label)), self.stream)
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    pub fn normal_vec(&mut self, len: usize) -> Vec<f64> {
        (0..len).map(|_| self.standard_normal()).collect()
    }

    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    /// A uniformly random `s`-subset of `0..n`.
    pub fn support(&mut self, n: usize, s: usize) -> SupportSet {
        let idx = index::sample(&mut self.inner, n, s).into_vec();
        SupportSet::new(idx, n).expect("sampled indices are distinct and in range")
    }
}

impl RngCore for Rng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Matrix with i.i.d. standard normal entries, drawn in row-major order.
///
/// Panics if either dimension is zero.
pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut Rng) -> DenseMatrix {
    assert!(rows >= 1 && cols >= 1, "gaussian_matrix needs positive dimensions");
    DenseMatrix::from_raw(rows, cols, rng.normal_vec(rows * cols))
}
