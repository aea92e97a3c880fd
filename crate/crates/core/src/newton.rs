//! Damped Newton iteration on square nonlinear systems.

use nalgebra::{DMatrix, DVector};

use crate::assembly::inf_norm;
use crate::linalg;

pub(crate) trait System {
    fn dim(&self) -> usize;
    /// `None` when `z` leaves the domain of some canonical function.
    fn residual(&self, z: &[f64]) -> Option<DVector<f64>>;
    fn jacobian(&self, z: &[f64]) -> Option<DMatrix<f64>>;
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Options {
    pub max_iter: usize,
    pub tol: f64,
    pub max_backtracks: usize,
    pub backtrack_factor: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Converged {
    pub z: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Failure {
    OutOfDomain,
    SingularJacobian { residual_inf: f64 },
    Stalled { residual_inf: f64 },
    MaxIter { residual_inf: f64 },
}

impl Failure {
    pub fn residual_inf(&self) -> f64 {
        match *self {
            Failure::OutOfDomain => f64::INFINITY,
            Failure::SingularJacobian { residual_inf }
            | Failure::Stalled { residual_inf }
            | Failure::MaxIter { residual_inf } => residual_inf,
        }
    }
}

/// Newton with backtracking on the residual ∞-norm.
pub(crate) fn solve<S: System>(sys: &S, z0: Vec<f64>, opts: Options) -> Result<Converged, Failure> {
    debug_assert_eq!(z0.len(), sys.dim());
    let mut z = z0;
    let mut r = sys.residual(&z).ok_or(Failure::OutOfDomain)?;
    let mut norm = inf_norm(r.as_slice());
    for _ in 0..opts.max_iter {
        if norm <= opts.tol {
            return Ok(Converged { z });
        }
        let jac = sys
            .jacobian(&z)
            .ok_or(Failure::SingularJacobian { residual_inf: norm })?;
        let step = linalg::solve_general(jac, &r)
            .ok_or(Failure::SingularJacobian { residual_inf: norm })?;

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_backtracks {
            let trial: Vec<f64> = z
                .iter()
                .zip(step.iter())
                .map(|(zi, si)| zi - t * si)
                .collect();
            if let Some(rt) = sys.residual(&trial) {
                let nt = inf_norm(rt.as_slice());
                if nt < norm {
                    accepted = Some((trial, rt, nt));
                    break;
                }
            }
            t *= opts.backtrack_factor;
        }
        match accepted {
            Some((zt, rt, nt)) => {
                z = zt;
                r = rt;
                norm = nt;
            }
            None => return Err(Failure::Stalled { residual_inf: norm }),
        }
    }
    if norm <= opts.tol {
        Ok(Converged { z })
    } else {
        Err(Failure::MaxIter { residual_inf: norm })
    }
}
