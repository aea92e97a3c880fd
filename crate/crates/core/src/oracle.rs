//! Brute-force checks that do not share code paths with the solver: dense
//! grid minimization, central finite differences, and cross-validation of
//! global-minimum certificates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{eval_objective, Problem};
use crate::solver::{Classification, CriticalPoint};
use crate::{Error, Result};

/// Hard cap on the number of grid points.
pub const MAX_GRID_POINTS: f64 = 1e8;
/// Default dimension cap unless [`GridSpec::allow_large_n`] is set.
pub const DEFAULT_MAX_DIM: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Closed interval per coordinate.
    pub bounds: Vec<(f64, f64)>,
    pub points_per_axis: usize,
    /// Feasibility band: `|h_j| ≤ feas_tol` and `g_i ≤ feas_tol`.
    pub feas_tol: f64,
    pub allow_large_n: bool,
}

impl GridSpec {
    pub fn new(bounds: Vec<(f64, f64)>, points_per_axis: usize, feas_tol: f64) -> Self {
        Self {
            bounds,
            points_per_axis,
            feas_tol,
            allow_large_n: false,
        }
    }

    pub fn validate(&self) -> Result<usize> {
        let n = self.bounds.len();
        if n == 0 {
            return Err(Error::InvalidParameter(
                "grid needs at least one axis".into(),
            ));
        }
        if n > DEFAULT_MAX_DIM && !self.allow_large_n {
            return Err(Error::InvalidParameter(format!(
                "grid oracle is limited to n <= {DEFAULT_MAX_DIM} without override"
            )));
        }
        if self.points_per_axis < 3 {
            return Err(Error::InvalidParameter(
                "points_per_axis must be at least 3".into(),
            ));
        }
        if !(self.feas_tol >= 0.0) {
            return Err(Error::InvalidParameter(
                "feas_tol must be non-negative".into(),
            ));
        }
        for &(lo, hi) in &self.bounds {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::InvalidParameter(
                    "grid bounds must be finite with lo <= hi".into(),
                ));
            }
        }
        let points = (self.points_per_axis as f64).powi(n as i32);
        if points > MAX_GRID_POINTS {
            return Err(Error::GridTooLarge {
                points,
                limit: MAX_GRID_POINTS,
            });
        }
        Ok(points as usize)
    }

    /// Grid spacing along axis `i`.
    pub fn spacing(&self, i: usize) -> f64 {
        let (lo, hi) = self.bounds[i];
        (hi - lo) / (self.points_per_axis - 1) as f64
    }

    fn point(&self, mut idx: usize) -> Vec<f64> {
        let k = self.points_per_axis;
        self.bounds
            .iter()
            .map(|&(lo, hi)| {
                let j = idx % k;
                idx /= k;
                // hit both endpoints exactly
                if j == k - 1 {
                    hi
                } else {
                    lo + (hi - lo) * j as f64 / (k - 1) as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMin {
    pub x_best: Vec<f64>,
    pub f_best: f64,
    pub feas_count: usize,
    pub evaluated: usize,
    pub feas_tol: f64,
}

/// Minimum of `value` over grid points where it returns `Some`. Ties go to
/// the lowest grid index.
pub fn grid_min_by<F>(gs: &GridSpec, value: F) -> Result<GridMin>
where
    F: Fn(&[f64]) -> Option<f64> + Sync,
{
    let total = gs.validate()?;
    let (best, feas_count) = (0..total)
        .into_par_iter()
        .map(|i| match value(&gs.point(i)) {
            Some(f) if f.is_finite() => (Some((f, i)), 1usize),
            _ => (None, 0usize),
        })
        .reduce(
            || (None, 0),
            |(a, ca), (b, cb)| {
                let best = match (a, b) {
                    (Some((fa, ia)), Some((fb, ib))) => {
                        if fb < fa || (fb == fa && ib < ia) {
                            Some((fb, ib))
                        } else {
                            Some((fa, ia))
                        }
                    }
                    (a, None) => a,
                    (None, b) => b,
                };
                (best, ca + cb)
            },
        );
    let (f_best, idx) = best.ok_or(Error::NoFeasiblePoint { evaluated: total })?;
    Ok(GridMin {
        x_best: gs.point(idx),
        f_best,
        feas_count,
        evaluated: total,
        feas_tol: gs.feas_tol,
    })
}

fn feasible(p: &Problem, x: &[f64], tol: f64) -> bool {
    let eq = p
        .h_terms()
        .iter()
        .all(|t| t.eval(x).is_ok_and(|h| h.abs() <= tol));
    eq && p
        .g_terms()
        .iter()
        .all(|t| t.eval(x).is_ok_and(|g| g <= tol))
}

/// Grid minimum of `f` over the feasibility band.
pub fn grid_constrained_min(p: &Problem, gs: &GridSpec) -> Result<GridMin> {
    if gs.bounds.len() != p.n() {
        return Err(Error::DimensionMismatch {
            what: "grid bounds",
            expected: p.n(),
            found: gs.bounds.len(),
        });
    }
    grid_min_by(gs, |x| {
        if feasible(p, x, gs.feas_tol) {
            eval_objective(p, x).ok()
        } else {
            None
        }
    })
}

/// Central-difference step `1e−5·(1 + |x_i|)`.
pub fn default_fd_step(xi: f64) -> f64 {
    1e-5 * (1.0 + xi.abs())
}

/// `max_i |∂_i analytic − central difference| / (1 + |∂_i analytic|)`.
pub fn fd_gradient_check<F>(f: F, analytic: &[f64], x: &[f64]) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    fd_gradient_check_with(f, analytic, x, default_fd_step)
}

pub fn fd_gradient_check_with<F, S>(f: F, analytic: &[f64], x: &[f64], step: S) -> f64
where
    F: Fn(&[f64]) -> f64,
    S: Fn(f64) -> f64,
{
    assert_eq!(analytic.len(), x.len(), "gradient length must match x");
    let mut probe = x.to_vec();
    let mut worst = 0.0_f64;
    for i in 0..x.len() {
        let h = step(x[i]);
        probe[i] = x[i] + h;
        let up = f(&probe);
        probe[i] = x[i] - h;
        let down = f(&probe);
        probe[i] = x[i];
        let fd = (up - down) / (2.0 * h);
        worst = worst.max((analytic[i] - fd).abs() / (1.0 + analytic[i].abs()));
    }
    worst
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalCheck {
    pub x: Vec<f64>,
    pub primal_value: f64,
    /// Best feasible grid value in a neighbourhood of `x`.
    pub neighbourhood_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub grid: GridMin,
    pub budget: f64,
    /// Best certified global-minimum value, if any point was certified.
    pub certified_min: Option<f64>,
    pub local_checks: Vec<LocalCheck>,
}

/// Number of grid spacings on each side of a certified point inspected by
/// the local check.
const NEIGHBOURHOOD_STEPS: f64 = 50.0;

/// Checks solver certificates against the grid: no feasible grid point may
/// beat a certified global minimum by more than `budget`.
pub fn cross_validate(
    p: &Problem,
    points: &[CriticalPoint],
    gs: &GridSpec,
    budget: f64,
) -> Result<CrossValidation> {
    let grid = grid_constrained_min(p, gs)?;
    let certified: Vec<&CriticalPoint> = points
        .iter()
        .filter(|q| q.classification == Classification::GlobalMinCertified)
        .collect();
    let mut local_checks = Vec::new();
    for q in &certified {
        if grid.f_best < q.primal_value - budget {
            return Err(Error::CertificationContradicted(format!(
                "grid point {:?} has f = {:.6} below certified global minimum {:.6} at {:?} (budget {budget})",
                grid.x_best, grid.f_best, q.primal_value, q.x
            )));
        }
        let local = GridSpec {
            bounds: q
                .x
                .iter()
                .enumerate()
                .map(|(i, &xi)| {
                    let r = NEIGHBOURHOOD_STEPS * gs.spacing(i);
                    (xi - r, xi + r)
                })
                .collect(),
            points_per_axis: 2 * NEIGHBOURHOOD_STEPS as usize + 1,
            ..gs.clone()
        };
        let neighbourhood_min = match grid_constrained_min(p, &local) {
            Ok(g) => g.f_best,
            Err(Error::NoFeasiblePoint { .. }) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        if neighbourhood_min < q.primal_value - budget {
            return Err(Error::CertificationContradicted(format!(
                "feasible neighbour improves f at {:?} to {neighbourhood_min:.6} (certified {:.6})",
                q.x, q.primal_value
            )));
        }
        local_checks.push(LocalCheck {
            x: q.x.clone(),
            primal_value: q.primal_value,
            neighbourhood_min,
        });
    }
    Ok(CrossValidation {
        grid,
        budget,
        certified_min: certified
            .iter()
            .map(|q| q.primal_value)
            .min_by(f64::total_cmp),
        local_checks,
    })
}

/// Counts interior local minima and maxima of a sampled curve from sign
/// changes of the forward-difference slope. Flat steps are skipped.
pub fn count_local_extrema(values: &[f64]) -> (usize, usize) {
    let slopes: Vec<f64> = values
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|d| *d != 0.0)
        .collect();
    let mut minima = 0;
    let mut maxima = 0;
    for w in slopes.windows(2) {
        if w[0] < 0.0 && w[1] > 0.0 {
            minima += 1;
        } else if w[0] > 0.0 && w[1] < 0.0 {
            maxima += 1;
        }
    }
    (minima, maxima)
}
