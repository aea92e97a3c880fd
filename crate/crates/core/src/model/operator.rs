use nalgebra::{DMatrix, DVector};

use super::{check_len, max_asymmetry};
use crate::{Error, Result};

/// Scalar quadratic map `ξ = ½xᵀQx + bᵀx + α`.
///
/// `Q` must be exactly symmetric; construction rejects any asymmetry.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticOperator {
    q: DMatrix<f64>,
    b: DVector<f64>,
    alpha: f64,
}

impl QuadraticOperator {
    pub fn new(q: DMatrix<f64>, b: DVector<f64>, alpha: f64) -> Result<Self> {
        let n = b.len();
        if n == 0 {
            return Err(Error::InvalidParameter(
                "operator dimension must be at least 1".into(),
            ));
        }
        check_len("operator Q rows", n, q.nrows())?;
        check_len("operator Q columns", n, q.ncols())?;
        let asymmetry = max_asymmetry(&q);
        if asymmetry > 0.0 {
            return Err(Error::NotSymmetric {
                what: "operator Q",
                asymmetry,
            });
        }
        if !(q.iter().all(|v| v.is_finite())
            && b.iter().all(|v| v.is_finite())
            && alpha.is_finite())
        {
            return Err(Error::InvalidParameter(
                "operator entries must be finite".into(),
            ));
        }
        Ok(Self { q, b, alpha })
    }

    /// `ξ = ½x²` in one dimension.
    pub fn half_square() -> Self {
        Self {
            q: DMatrix::from_element(1, 1, 1.0),
            b: DVector::zeros(1),
            alpha: 0.0,
        }
    }

    /// Constant operator `ξ ≡ α` on `n` variables.
    pub fn constant(n: usize, alpha: f64) -> Result<Self> {
        Self::new(DMatrix::zeros(n, n), DVector::zeros(n), alpha)
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_len("operator argument", self.dim(), x.len())?;
        Ok(self.eval_unchecked(x))
    }

    /// `∇Λ(x) = Qx + b`.
    pub fn gradient(&self, x: &[f64]) -> Result<DVector<f64>> {
        check_len("operator argument", self.dim(), x.len())?;
        Ok(self.gradient_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        let n = self.dim();
        let mut quad = 0.0;
        let mut lin = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                row += self.q[(i, j)] * x[j];
            }
            quad += x[i] * row;
            lin += self.b[i] * x[i];
        }
        0.5 * quad + lin + self.alpha
    }

    pub(crate) fn gradient_unchecked(&self, x: &[f64]) -> DVector<f64> {
        &self.q * DVector::from_column_slice(x) + &self.b
    }
}
