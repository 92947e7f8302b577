//! Small dense factorizations: Cholesky, Householder QR and one-sided Jacobi
//! SVD. Sizes here are tens of rows and columns, so everything is written for
//! clarity over blocking.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::matrix::{dot, DenseMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {0})")]
    NotPositiveDefinite(usize),
    #[error("matrix must be square")]
    NotSquare,
    #[error("QR needs rows >= cols")]
    Wide,
}

/// Relative singular-value cutoff factor used for every rank decision.
pub const RANK_RTOL: f64 = 1e-10;

/// Lower-triangular Cholesky factor `L` with `M = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    pub fn new(m: &DenseMatrix) -> Result<Self, LinalgError> {
        Self::factor(m, None)
    }

    /// Interior-point variant: a pivot that collapses below `tiny` times the
    /// largest diagonal entry is replaced by a huge value, which removes that
    /// direction from the solve instead of failing.
    pub fn new_modified(m: &DenseMatrix) -> Result<Self, LinalgError> {
        let max_diag = (0..m.rows()).fold(0.0_f64, |acc, i| acc.max(m[(i, i)].abs()));
        Self::factor(m, Some(max_diag * 1e-30))
    }

    fn factor(m: &DenseMatrix, tiny: Option<f64>) -> Result<Self, LinalgError> {
        if m.rows() != m.cols() {
            return Err(LinalgError::NotSquare);
        }
        let n = m.rows();
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = m[(j, j)] - dot(&l[j * n..j * n + j], &l[j * n..j * n + j]);
            if d.is_nan() || d <= 0.0 || tiny.is_some_and(|t| d <= t) {
                match tiny {
                    Some(_) if d.is_finite() => d = 1e128,
                    _ => return Err(LinalgError::NotPositiveDefinite(j)),
                }
            }
            let djj = d.sqrt();
            l[j * n + j] = djj;
            for i in j + 1..n {
                let s = m[(i, j)] - dot(&l[i * n..i * n + j], &l[j * n..j * n + j]);
                l[i * n + j] = s / djj;
            }
        }
        Ok(Self { n, l })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut y = b.to_vec();
        for i in 0..n {
            let s = dot(&self.l[i * n..i * n + i], &y[..i]);
            y[i] = (y[i] - s) / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|k| self.l[k * n + i] * y[k]).sum();
            y[i] = (y[i] - s) / self.l[i * n + i];
        }
        y
    }
}

/// Householder QR of a tall (or square) matrix.
#[derive(Debug, Clone)]
pub struct Qr {
    m: usize,
    n: usize,
    /// Householder vectors, column `k` stored in `v[k]` (length `m - k`).
    v: Vec<Vec<f64>>,
    /// Upper-triangular `R`, row-major `n x n`.
    r: Vec<f64>,
}

impl Qr {
    pub fn new(a: &DenseMatrix) -> Result<Self, LinalgError> {
        let (m, n) = a.shape();
        if m < n {
            return Err(LinalgError::Wide);
        }
        // column-major working copy
        let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
        let mut vs = Vec::with_capacity(n);
        for k in 0..n {
            let x = &cols[k][k..];
            let alpha = {
                let nx = dot(x, x).sqrt();
                if x[0] > 0.0 {
                    -nx
                } else {
                    nx
                }
            };
            let mut v = x.to_vec();
            v[0] -= alpha;
            let vn = dot(&v, &v).sqrt();
            if vn > 0.0 {
                v.iter_mut().for_each(|e| *e /= vn);
            }
            for col in cols.iter_mut().skip(k) {
                let tail = &mut col[k..];
                let p = 2.0 * dot(&v, tail);
                tail.iter_mut().zip(&v).for_each(|(t, vi)| *t -= p * vi);
            }
            vs.push(v);
        }
        let mut r = vec![0.0; n * n];
        for (j, col) in cols.iter().enumerate() {
            for i in 0..=j {
                r[i * n + j] = col[i];
            }
        }
        Ok(Self { m, n, v: vs, r })
    }

    /// Applies `Qᵀ` to a vector of length `m`.
    pub fn apply_qt(&self, b: &mut [f64]) {
        for (k, v) in self.v.iter().enumerate() {
            let tail = &mut b[k..];
            let p = 2.0 * dot(v, tail);
            tail.iter_mut().zip(v).for_each(|(t, vi)| *t -= p * vi);
        }
    }

    /// Applies `Q` to a vector of length `m`.
    pub fn apply_q(&self, b: &mut [f64]) {
        for (k, v) in self.v.iter().enumerate().rev() {
            let tail = &mut b[k..];
            let p = 2.0 * dot(v, tail);
            tail.iter_mut().zip(v).for_each(|(t, vi)| *t -= p * vi);
        }
    }

    pub fn r_diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.r[i * self.n + i]).collect()
    }

    /// Least-squares solution `argmin ‖A x − b‖₂`; assumes full column rank.
    pub fn solve_ls(&self, b: &[f64]) -> Vec<f64> {
        let mut qtb = b.to_vec();
        self.apply_qt(&mut qtb);
        let n = self.n;
        let mut x = qtb[..n].to_vec();
        for i in (0..n).rev() {
            let s = dot(&self.r[i * n + i + 1..i * n + n], &x[i + 1..n]);
            x[i] = (x[i] - s) / self.r[i * n + i];
        }
        x
    }

    /// Orthonormal basis of the orthogonal complement of `range(A)` as an
    /// `m x (m - n)` matrix, or `None` when `A` is square.
    pub fn complement_basis(&self) -> Option<DenseMatrix> {
        let extra = self.m - self.n;
        if extra == 0 {
            return None;
        }
        let mut out = DenseMatrix::zeros(self.m, extra);
        for c in 0..extra {
            let mut e = vec![0.0; self.m];
            e[self.n + c] = 1.0;
            self.apply_q(&mut e);
            out.set_column(c, &e);
        }
        Some(out)
    }
}

/// Thin singular value decomposition `A = U diag(s) Vᵀ`, singular values in
/// descending order.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DenseMatrix,
    pub s: Vec<f64>,
    pub v: DenseMatrix,
}

impl Svd {
    pub fn new(a: &DenseMatrix) -> Self {
        if a.rows() >= a.cols() {
            jacobi_tall(a)
        } else {
            let t = jacobi_tall(&a.transpose());
            Svd { u: t.v, s: t.s, v: t.u }
        }
    }

    pub fn max_singular(&self) -> f64 {
        self.s.first().copied().unwrap_or(0.0)
    }

    /// `‖A‖₂ · RANK_RTOL · max(m, n)`.
    pub fn cutoff(&self) -> f64 {
        self.max_singular() * RANK_RTOL * self.u.rows().max(self.v.rows()) as f64
    }

    pub fn rank(&self) -> usize {
        let tol = self.cutoff();
        self.s.iter().filter(|&&s| s > tol).count()
    }

    /// Minimum-norm least-squares solution using the rank cutoff.
    pub fn solve_min_norm(&self, b: &[f64]) -> Vec<f64> {
        let tol = self.cutoff();
        let n = self.v.rows();
        let mut x = vec![0.0; n];
        for (k, &sk) in self.s.iter().enumerate() {
            if sk <= tol {
                continue;
            }
            let uk = self.u.column(k);
            let coef = dot(&uk, b) / sk;
            for (i, xi) in x.iter_mut().enumerate() {
                *xi += coef * self.v[(i, k)];
            }
        }
        x
    }
}

fn jacobi_tall(a: &DenseMatrix) -> Svd {
    let (m, n) = a.shape();
    let mut u: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();
    let eps = f64::EPSILON;
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&u[p], &u[p]);
                let beta = dot(&u[q], &u[q]);
                let gamma = dot(&u[p], &u[q]);
                if gamma == 0.0 || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut u, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<(f64, usize)> = u.iter().enumerate().map(|(j, c)| (dot(c, c).sqrt(), j)).collect();
    order.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    let mut um = DenseMatrix::zeros(m, n);
    let mut vm = DenseMatrix::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (k, &(sk, j)) in order.iter().enumerate() {
        s.push(sk);
        let col: Vec<f64> = if sk > 0.0 { u[j].iter().map(|x| x / sk).collect() } else { vec![0.0; m] };
        um.set_column(k, &col);
        vm.set_column(k, &v[j]);
    }
    Svd { u: um, s, v: vm }
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(q);
    let (cp, cq) = (&mut lo[p], &mut hi[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

/// Numerical rank with the singular-value cutoff `‖A‖₂·1e−10·max(m, n)`.
pub fn numerical_rank(a: &DenseMatrix) -> usize {
    Svd::new(a).rank()
}
