//! JSON problem file schema.
//!
//! ```json
//! {
//!   "n": 1,
//!   "A": [[1.0]],
//!   "c": [1.0],
//!   "equalities": [
//!     { "V": { "kind": "shifted_quadratic", "a": 1.0, "d": 6.0, "e": -15.0 },
//!       "Lambda": { "Q": [[1.0]], "b": [0.0], "alpha": 0.0 } }
//!   ]
//! }
//! ```
//!
//! Unknown fields are rejected everywhere.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::model::{CanonicalFunction, CanonicalTerm, Problem, QuadraticOperator};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub n: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub c: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_term: Option<TermFile>,
    #[serde(default)]
    pub inequalities: Vec<TermFile>,
    #[serde(default)]
    pub equalities: Vec<TermFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermFile {
    #[serde(rename = "V")]
    pub v: FunctionFile,
    #[serde(rename = "Lambda")]
    pub lambda: OperatorFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionFile {
    ShiftedQuadratic { a: f64, d: f64, e: f64 },
    Exponential {},
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorFile {
    #[serde(rename = "Q")]
    pub q: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub alpha: f64,
}

fn matrix(what: &'static str, n: usize, rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    if rows.len() != n {
        return Err(Error::DimensionMismatch {
            what,
            expected: n,
            found: rows.len(),
        });
    }
    for r in rows {
        if r.len() != n {
            return Err(Error::DimensionMismatch {
                what,
                expected: n,
                found: r.len(),
            });
        }
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

impl TermFile {
    fn to_term(&self, n: usize) -> Result<CanonicalTerm> {
        let v = match self.v {
            FunctionFile::ShiftedQuadratic { a, d, e } => {
                CanonicalFunction::shifted_quadratic(a, d, e)?
            }
            FunctionFile::Exponential {} => CanonicalFunction::Exponential,
        };
        if self.lambda.b.len() != n {
            return Err(Error::DimensionMismatch {
                what: "Lambda.b",
                expected: n,
                found: self.lambda.b.len(),
            });
        }
        let op = QuadraticOperator::new(
            matrix("Lambda.Q", n, &self.lambda.q)?,
            DVector::from_column_slice(&self.lambda.b),
            self.lambda.alpha,
        )?;
        Ok(CanonicalTerm::new(v, op))
    }

    fn from_term(t: &CanonicalTerm) -> Result<Self> {
        let v = match t.v {
            CanonicalFunction::ShiftedQuadratic { a, d, e } => {
                FunctionFile::ShiftedQuadratic { a, d, e }
            }
            CanonicalFunction::Exponential => FunctionFile::Exponential {},
            CanonicalFunction::Custom(_) => {
                return Err(Error::Unsupported(
                    "custom canonical functions have no file representation".into(),
                ))
            }
        };
        Ok(Self {
            v,
            lambda: OperatorFile {
                q: rows_of(t.lambda_op.q()),
                b: t.lambda_op.b().as_slice().to_vec(),
                alpha: t.lambda_op.alpha(),
            },
        })
    }
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidParameter(format!("problem file: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem file serializes")
    }

    /// Builds the in-memory problem; rejects any asymmetry in `A` or `Q`.
    pub fn to_problem(&self) -> Result<Problem> {
        let n = self.n;
        if self.c.len() != n {
            return Err(Error::DimensionMismatch {
                what: "c",
                expected: n,
                found: self.c.len(),
            });
        }
        let mut p = Problem::new(
            matrix("A", n, &self.a)?,
            DVector::from_column_slice(&self.c),
        )?;
        if let Some(t) = &self.f_term {
            p = p.with_objective_term(t.to_term(n)?)?;
        }
        for t in &self.inequalities {
            p = p.with_inequality(t.to_term(n)?)?;
        }
        for t in &self.equalities {
            p = p.with_equality(t.to_term(n)?)?;
        }
        Ok(p)
    }

    pub fn from_problem(p: &Problem) -> Result<Self> {
        Ok(Self {
            n: p.n(),
            a: rows_of(p.a()),
            c: p.c().as_slice().to_vec(),
            f_term: p.f_term().map(TermFile::from_term).transpose()?,
            inequalities: p
                .g_terms()
                .iter()
                .map(TermFile::from_term)
                .collect::<Result<_>>()?,
            equalities: p
                .h_terms()
                .iter()
                .map(TermFile::from_term)
                .collect::<Result<_>>()?,
        })
    }
}
