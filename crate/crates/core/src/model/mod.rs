//! Problem representation: quadratic operators, canonical functions and the
//! composite problem built from them.

mod canonical;
mod operator;
mod problem;

pub use canonical::{conjugate_roundtrip_check, Canonical, CanonicalFunction};
pub use operator::QuadraticOperator;
pub use problem::{eval_constraint, eval_objective, CanonicalTerm, Problem};

use crate::{Error, Result};
use nalgebra::DMatrix;

/// Largest absolute entry of `m − mᵀ`.
pub(crate) fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub(crate) fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            what,
            expected,
            found,
        });
    }
    Ok(())
}
