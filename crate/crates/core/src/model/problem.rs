use nalgebra::{DMatrix, DVector};

use super::{check_len, max_asymmetry, CanonicalFunction, QuadraticOperator};
use crate::{Error, Result};

/// A composite `V(Λ(x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalTerm {
    pub v: CanonicalFunction,
    pub lambda_op: QuadraticOperator,
}

impl CanonicalTerm {
    pub fn new(v: CanonicalFunction, lambda_op: QuadraticOperator) -> Self {
        Self { v, lambda_op }
    }

    pub fn dim(&self) -> usize {
        self.lambda_op.dim()
    }

    /// `V(Λ(x))`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let xi = self.lambda_op.eval(x)?;
        self.v.eval(xi)
    }

    /// `V′(Λ(x))·∇Λ(x)`.
    pub fn gradient(&self, x: &[f64]) -> Result<DVector<f64>> {
        let xi = self.lambda_op.eval(x)?;
        let slope = self.v.dual_of(xi)?;
        Ok(self.lambda_op.gradient_unchecked(x) * slope)
    }
}

/// `min V_f(Λ_f(x)) + ½xᵀAx − cᵀx` subject to `g_i(x) ≤ 0` and `h_j(x) = 0`,
/// each constraint a [`CanonicalTerm`].
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    a: DMatrix<f64>,
    c: DVector<f64>,
    f_term: Option<CanonicalTerm>,
    g_terms: Vec<CanonicalTerm>,
    h_terms: Vec<CanonicalTerm>,
}

impl Problem {
    /// Unconstrained quadratic core `½xᵀAx − cᵀx`.
    pub fn new(a: DMatrix<f64>, c: DVector<f64>) -> Result<Self> {
        let n = c.len();
        if n == 0 {
            return Err(Error::InvalidParameter(
                "problem dimension must be at least 1".into(),
            ));
        }
        check_len("A rows", n, a.nrows())?;
        check_len("A columns", n, a.ncols())?;
        let asymmetry = max_asymmetry(&a);
        if asymmetry > 0.0 {
            return Err(Error::NotSymmetric {
                what: "A",
                asymmetry,
            });
        }
        Ok(Self {
            a,
            c,
            f_term: None,
            g_terms: Vec::new(),
            h_terms: Vec::new(),
        })
    }

    pub fn with_objective_term(mut self, term: CanonicalTerm) -> Result<Self> {
        check_len("objective term", self.n(), term.dim())?;
        self.f_term = Some(term);
        Ok(self)
    }

    pub fn with_inequality(mut self, term: CanonicalTerm) -> Result<Self> {
        check_len("inequality term", self.n(), term.dim())?;
        self.g_terms.push(term);
        Ok(self)
    }

    pub fn with_equality(mut self, term: CanonicalTerm) -> Result<Self> {
        check_len("equality term", self.n(), term.dim())?;
        self.h_terms.push(term);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    /// Number of inequality constraints.
    pub fn m(&self) -> usize {
        self.g_terms.len()
    }

    /// Number of equality constraints.
    pub fn p(&self) -> usize {
        self.h_terms.len()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn c(&self) -> &DVector<f64> {
        &self.c
    }

    pub fn f_term(&self) -> Option<&CanonicalTerm> {
        self.f_term.as_ref()
    }

    pub fn g_terms(&self) -> &[CanonicalTerm] {
        &self.g_terms
    }

    pub fn h_terms(&self) -> &[CanonicalTerm] {
        &self.h_terms
    }

    /// `½xᵀAx − cᵀx`, i.e. `−U(x)`.
    pub fn quadratic_part(&self, x: &[f64]) -> Result<f64> {
        check_len("x", self.n(), x.len())?;
        let xv = DVector::from_column_slice(x);
        Ok(0.5 * xv.dot(&(&self.a * &xv)) - self.c.dot(&xv))
    }

    /// `∇f(x) = Ax − c + V_f′(Λ_f(x))∇Λ_f(x)`.
    pub fn objective_gradient(&self, x: &[f64]) -> Result<DVector<f64>> {
        check_len("x", self.n(), x.len())?;
        let xv = DVector::from_column_slice(x);
        let mut grad = &self.a * &xv - &self.c;
        if let Some(t) = &self.f_term {
            grad += t.gradient(x)?;
        }
        Ok(grad)
    }

    pub fn equality_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.h_terms.iter().map(|t| t.eval(x)).collect()
    }

    pub fn inequality_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.g_terms.iter().map(|t| t.eval(x)).collect()
    }
}

pub fn eval_constraint(term: &CanonicalTerm, x: &[f64]) -> Result<f64> {
    term.eval(x)
}

/// `f(x) = V_f(Λ_f(x)) + ½xᵀAx − cᵀx`.
pub fn eval_objective(p: &Problem, x: &[f64]) -> Result<f64> {
    let mut value = p.quadratic_part(x)?;
    if let Some(t) = p.f_term() {
        value += t.eval(x)?;
    }
    Ok(value)
}
