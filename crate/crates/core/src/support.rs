//! Supports and sign patterns.
//!
//! A [`SignPattern`] is always stored in negation-canonical form: the sign at
//! the smallest support index is `+1`. A pattern and its negation therefore
//! compare equal, which is the identification used throughout for faces of
//! the cross-polytope and orthant pairs.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::matrix::{norm2, DenseMatrix};

/// Default magnitude below which an entry has no well-defined sign.
pub const DEFAULT_ZERO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SupportError {
    #[error("support index {index} out of range for ambient dimension {ambient}")]
    OutOfRange { index: usize, ambient: usize },
    #[error("duplicate support index {0}")]
    Duplicate(usize),
    #[error("support is empty")]
    EmptySupport,
    #[error("sign vector length {signs} does not match support size {support}")]
    LengthMismatch { signs: usize, support: usize },
    #[error("sign at position {0} is not +1 or -1")]
    InvalidSign(usize),
    #[error("entry {index} has magnitude {magnitude:e}, at or below the zero tolerance")]
    AmbiguousSign { index: usize, magnitude: f64 },
    #[error("support of size {0} is too large to enumerate")]
    TooLarge(usize),
}

/// Strictly increasing 0-based indices into `0..ambient`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SupportSet {
    indices: Vec<usize>,
    ambient: usize,
}

impl SupportSet {
    /// Sorts the indices; duplicates and out-of-range entries are rejected.
    pub fn new(mut indices: Vec<usize>, ambient: usize) -> Result<Self, SupportError> {
        indices.sort_unstable();
        for w in indices.windows(2) {
            if w[0] == w[1] {
                return Err(SupportError::Duplicate(w[0]));
            }
        }
        if let Some(&index) = indices.iter().find(|&&i| i >= ambient) {
            return Err(SupportError::OutOfRange { index, ambient });
        }
        Ok(Self { indices, ambient })
    }

    pub fn full(ambient: usize) -> Self {
        Self { indices: (0..ambient).collect(), ambient }
    }

    /// Indices where `|x_j| > tol`.
    pub fn of_vector(x: &[f64], tol: f64) -> Self {
        let indices = x.iter().enumerate().filter(|(_, v)| v.abs() > tol).map(|(i, _)| i).collect();
        Self { indices, ambient: x.len() }
    }

    /// Rows of `x` whose ℓ2 norm exceeds `tol`.
    pub fn row_support(x: &DenseMatrix, tol: f64) -> Self {
        let indices = (0..x.rows()).filter(|&i| norm2(x.row(i)) > tol).collect();
        Self { indices, ambient: x.rows() }
    }

    #[inline]
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    #[inline]
    pub fn ambient(&self) -> usize {
        self.ambient
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.indices.binary_search(&j).is_ok()
    }

    pub fn complement(&self) -> Vec<usize> {
        (0..self.ambient).filter(|j| !self.contains(*j)).collect()
    }

    /// Scatters `values` (one per support index) into a zero vector of the
    /// ambient length.
    pub fn scatter(&self, values: &[f64]) -> Vec<f64> {
        assert_eq!(values.len(), self.len());
        let mut out = alloc::vec![0.0; self.ambient];
        for (&j, &v) in self.indices.iter().zip(values) {
            out[j] = v;
        }
        out
    }

    pub fn gather(&self, x: &[f64]) -> Vec<f64> {
        self.indices.iter().map(|&j| x[j]).collect()
    }
}

impl fmt::Display for SupportSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, i) in self.indices.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        Ok(())
    }
}

/// Signs on a support, negation-canonical.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignPattern {
    support: SupportSet,
    signs: Vec<i8>,
}

impl SignPattern {
    /// Returns the representative of `{signs, -signs}` whose leading sign is
    /// `+1`.
    pub fn canonicalize(support: SupportSet, signs: &[i8]) -> Result<Self, SupportError> {
        if support.is_empty() {
            return Err(SupportError::EmptySupport);
        }
        if signs.len() != support.len() {
            return Err(SupportError::LengthMismatch { signs: signs.len(), support: support.len() });
        }
        if let Some(k) = signs.iter().position(|&s| s != 1 && s != -1) {
            return Err(SupportError::InvalidSign(k));
        }
        let flip = signs[0] < 0;
        let signs = signs.iter().map(|&s| if flip { -s } else { s }).collect();
        Ok(Self { support, signs })
    }

    /// The `k`-th canonical pattern on `support`, `k < 2^(|support|-1)`.
    ///
    /// Bit `i` of `k` set means the sign at support position `i + 1` is `-1`.
    pub fn canonical_from_index(support: SupportSet, k: u64) -> Result<Self, SupportError> {
        let s = support.len();
        if s == 0 {
            return Err(SupportError::EmptySupport);
        }
        if s > 64 {
            return Err(SupportError::TooLarge(s));
        }
        let mut signs = alloc::vec![1i8; s];
        for (i, sign) in signs.iter_mut().enumerate().skip(1) {
            if (k >> (i - 1)) & 1 == 1 {
                *sign = -1;
            }
        }
        Ok(Self { support, signs })
    }

    #[inline]
    pub fn support(&self) -> &SupportSet {
        &self.support
    }

    #[inline]
    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn signs_f64(&self) -> Vec<f64> {
        self.signs.iter().map(|&s| f64::from(s)).collect()
    }

    pub fn negated_signs(&self) -> Vec<i8> {
        self.signs.iter().map(|s| -s).collect()
    }

    /// Renders the signs as a `+`/`-` string, e.g. `+-++-`.
    pub fn to_sign_string(&self) -> String {
        self.signs.iter().map(|&s| if s > 0 { '+' } else { '-' }).collect()
    }

    /// Parses a `+`/`-` string on the given support and canonicalizes it.
    pub fn parse(support: SupportSet, text: &str) -> Result<Self, SupportError> {
        let signs: Vec<i8> = text
            .chars()
            .enumerate()
            .map(|(k, c)| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                _ => Err(SupportError::InvalidSign(k)),
            })
            .collect::<Result<_, _>>()?;
        Self::canonicalize(support, &signs)
    }
}

impl fmt::Display for SignPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_sign_string())
    }
}

/// Canonical sign pattern of `x` restricted to `support`.
pub fn sign_pattern_of(x: &[f64], support: &SupportSet, zero_tol: f64) -> Result<SignPattern, SupportError> {
    let mut signs = Vec::with_capacity(support.len());
    for &j in support.indices() {
        let v = x[j];
        if v.abs() <= zero_tol {
            return Err(SupportError::AmbiguousSign { index: j, magnitude: v.abs() });
        }
        signs.push(if v > 0.0 { 1 } else { -1 });
    }
    SignPattern::canonicalize(support.clone(), &signs)
}
