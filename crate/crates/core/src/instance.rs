use crate::matrix::{DenseMatrix, MatrixError};
use crate::support::SupportSet;

/// One generated trial: `A`, the row-sparse `X₀`, `B = A X₀` and the row
/// support of `X₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub a: DenseMatrix,
    pub x0: DenseMatrix,
    pub b: DenseMatrix,
    pub support: SupportSet,
}

impl ProblemInstance {
    pub fn new(a: DenseMatrix, x0: DenseMatrix) -> Result<Self, MatrixError> {
        let b = a.matmul(&x0)?;
        let support = SupportSet::row_support(&x0, 0.0);
        Ok(Self { a, x0, b, support })
    }

    /// `X₀` with nonzero entries drawn i.i.d. standard normal on `support`.
    pub fn gaussian_on_support(a: DenseMatrix, support: &SupportSet, r: usize, rng: &mut crate::Rng) -> Self {
        let mut x0 = DenseMatrix::zeros(a.cols(), r);
        for &j in support.indices() {
            for v in x0.row_mut(j) {
                *v = rng.standard_normal();
            }
        }
        Self::new(a, x0).expect("x0 has one row per column of A")
    }

    pub fn m(&self) -> usize {
        self.a.rows()
    }

    pub fn n(&self) -> usize {
        self.a.cols()
    }

    pub fn r(&self) -> usize {
        self.x0.cols()
    }

    /// The `|I| x r` nonzero block of `X₀`.
    pub fn xbar(&self) -> DenseMatrix {
        self.x0.select_rows(self.support.indices())
    }
}
