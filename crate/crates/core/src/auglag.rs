//! Augmented Lagrangian `L_ν(x, μ) = f(x) + μᵀh(x) + ½ν⁻¹‖h(x)‖²` for
//! equality-constrained problems, canonicalized with `τ = h(x)/ν`.
//!
//! The penalty contributes `V₀(ξ₀) = ξ₀²/(2ν)` with conjugate `ντ²/2`, so the
//! complementarity function keeps the shape of the plain one with equality
//! weights `μ + τ` and an extra `−ντ²/2`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::{self, inf_norm, Weights};
use crate::model::{check_len, eval_objective, Canonical, Problem};
use crate::newton::{self, System};
use crate::solver::{
    self, classify_parts, grid_point, grid_size, report_order, same_point, term_at, Classification,
    CriticalPoint, SolverConfig,
};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugLagConfig {
    pub nu0: f64,
    /// Penalty schedule `ν_{k+1} = α·ν_k`.
    pub alpha: f64,
    pub mu0: Vec<f64>,
    pub max_outer_iter: usize,
    pub feasibility_tol: f64,
}

impl AugLagConfig {
    pub fn new(mu0: Vec<f64>, nu0: f64) -> Self {
        Self {
            nu0,
            alpha: 0.5,
            mu0,
            max_outer_iter: 50,
            feasibility_tol: 1e-8,
        }
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        if !(self.nu0 > 0.0 && self.nu0.is_finite()) {
            return Err(Error::InvalidParameter("nu0 must be positive".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter("alpha must lie in (0, 1)".into()));
        }
        if !(self.feasibility_tol > 0.0) {
            return Err(Error::InvalidParameter(
                "feasibility_tol must be positive".into(),
            ));
        }
        check_len("mu0", p, self.mu0.len())
    }
}

/// Critical point of the augmented complementarity function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugCriticalPoint {
    pub x: Vec<f64>,
    /// Fixed `μ_k` for a sub-problem, the solved `μ` for the full dual.
    pub mu: Vec<f64>,
    pub tau: Vec<f64>,
    pub sigma_f: Option<f64>,
    pub sigma_h: Vec<f64>,
    pub mu_plus_tau: Vec<f64>,
    pub l_value: f64,
    pub dual_value: Option<f64>,
    pub xi1_value: f64,
    pub g_eigenvalues: Vec<f64>,
    pub kkt_residual_inf: f64,
    pub classification: Classification,
}

impl AugCriticalPoint {
    /// `max |L − P^d|` and `|L − Ξ₁|`.
    pub fn gap(&self) -> f64 {
        let d = self.dual_value.map_or(0.0, |d| (self.l_value - d).abs());
        d.max((self.l_value - self.xi1_value).abs())
    }
}

fn check_setting(p: &Problem, nu: f64) -> Result<()> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "penalty nu must be positive, got {nu}"
        )));
    }
    if p.p() == 0 {
        return Err(Error::InvalidParameter(
            "augmented Lagrangian needs at least one equality constraint".into(),
        ));
    }
    Ok(())
}

/// `L_ν(x, μ) = f(x) + μᵀh(x) + ½ν⁻¹‖h(x)‖²`.
pub fn eval_auglag(p: &Problem, x: &[f64], mu: &[f64], nu: f64) -> Result<f64> {
    check_setting(p, nu)?;
    check_len("mu", p.p(), mu.len())?;
    let h = p.equality_values(x)?;
    let penalty: f64 = h.iter().map(|v| v * v).sum::<f64>() / (2.0 * nu);
    let linear: f64 = h.iter().zip(mu).map(|(v, m)| v * m).sum();
    Ok(eval_objective(p, x)? + linear + penalty)
}

/// `∇_x L_ν = ∇f + Σ (μ_j + h_j/ν)∇h_j`.
pub fn auglag_gradient(p: &Problem, x: &[f64], mu: &[f64], nu: f64) -> Result<Vec<f64>> {
    check_setting(p, nu)?;
    check_len("mu", p.p(), mu.len())?;
    let mut grad = p.objective_gradient(x)?;
    for (t, &m) in p.h_terms().iter().zip(mu) {
        grad += t.gradient(x)? * (m + t.eval(x)? / nu);
    }
    Ok(grad.as_slice().to_vec())
}

/// Variables `[x | μ (free only) | τ | σ_f | σ_h]`.
struct AugSystem<'a> {
    p: &'a Problem,
    nu: f64,
    fixed_mu: Option<&'a [f64]>,
}

impl AugSystem<'_> {
    fn n(&self) -> usize {
        self.p.n()
    }
    fn mu_at(&self) -> usize {
        self.n()
    }
    fn tau_at(&self) -> usize {
        self.n()
            + if self.fixed_mu.is_some() {
                0
            } else {
                self.p.p()
            }
    }
    fn sigma_f_at(&self) -> usize {
        self.tau_at() + self.p.p()
    }
    fn sigma_h_at(&self) -> usize {
        self.sigma_f_at() + usize::from(self.p.f_term().is_some())
    }

    fn mu(&self, z: &[f64], j: usize) -> f64 {
        match self.fixed_mu {
            Some(mu) => mu[j],
            None => z[self.mu_at() + j],
        }
    }

    fn pack(
        &self,
        x: &[f64],
        mu: &[f64],
        tau: &[f64],
        sigma_f: Option<f64>,
        sigma_h: &[f64],
    ) -> Vec<f64> {
        let mut z = x.to_vec();
        if self.fixed_mu.is_none() {
            z.extend_from_slice(mu);
        }
        z.extend_from_slice(tau);
        z.extend(sigma_f);
        z.extend_from_slice(sigma_h);
        z
    }

    /// Converged `z` → evaluated point.
    fn finish(&self, z: &[f64], residual: f64, cfg: &SolverConfig) -> Result<AugCriticalPoint> {
        let (n, pc) = (self.n(), self.p.p());
        let x = z[..n].to_vec();
        let mu: Vec<f64> = (0..pc).map(|j| self.mu(z, j)).collect();
        let tau = z[self.tau_at()..self.tau_at() + pc].to_vec();
        let sigma_f = self.p.f_term().map(|_| z[self.sigma_f_at()]);
        let sigma_h = z[self.sigma_h_at()..self.sigma_h_at() + pc].to_vec();
        let mu_plus_tau: Vec<f64> = mu.iter().zip(&tau).map(|(m, t)| m + t).collect();
        let weights = Weights {
            sigma_f,
            w_g: &[],
            sigma_g: &[],
            w_h: &mu_plus_tau,
            sigma_h: &sigma_h,
        };
        let penalty_conj: f64 = tau.iter().map(|t| 0.5 * self.nu * t * t).sum();
        let aq = assembly::assemble_weighted(self.p, weights)?;
        let g_eigenvalues = aq.eigenvalues();
        let dual_value = assembly::dual_value_of(&aq).ok().map(|v| v - penalty_conj);
        let xi1_value = assembly::xi1_weighted(self.p, &x, weights)? - penalty_conj;
        let l_value = eval_auglag(self.p, &x, &mu, self.nu)?;
        let classification = classify_parts(&g_eigenvalues, &mu_plus_tau, &[], cfg);
        Ok(AugCriticalPoint {
            x,
            mu,
            tau,
            sigma_f,
            sigma_h,
            mu_plus_tau,
            l_value,
            dual_value,
            xi1_value,
            g_eigenvalues,
            kkt_residual_inf: residual,
            classification,
        })
    }
}

impl System for AugSystem<'_> {
    fn dim(&self) -> usize {
        self.sigma_h_at() + self.p.p()
    }

    fn residual(&self, z: &[f64]) -> Option<DVector<f64>> {
        let (n, pc) = (self.n(), self.p.p());
        let x = &z[..n];
        let mut r = DVector::zeros(self.dim());
        let mut rx = self.p.a() * DVector::from_column_slice(x) - self.p.c();
        let mut row = n;
        if let Some(t) = self.p.f_term() {
            let (xi, grad) = term_at(t, x)?;
            let s = z[self.sigma_f_at()];
            if !t.v.in_dual_domain(s) {
                return None;
            }
            rx += grad * s;
            r[row] = s - t.v.derivative(xi);
            row += 1;
        }
        let mut h = Vec::with_capacity(pc);
        for (j, t) in self.p.h_terms().iter().enumerate() {
            let (xi, grad) = term_at(t, x)?;
            let s = z[self.sigma_h_at() + j];
            if !t.v.in_dual_domain(s) {
                return None;
            }
            let w = self.mu(z, j) + z[self.tau_at() + j];
            rx += grad * (w * s);
            r[row] = s - t.v.derivative(xi);
            row += 1;
            h.push(t.v.value(xi));
        }
        for j in 0..pc {
            r[row] = h[j] - self.nu * z[self.tau_at() + j];
            row += 1;
        }
        if self.fixed_mu.is_none() {
            for hj in &h {
                r[row] = *hj;
                row += 1;
            }
        }
        r.rows_mut(0, n).copy_from(&rx);
        Some(r)
    }

    fn jacobian(&self, z: &[f64]) -> Option<DMatrix<f64>> {
        let (n, pc) = (self.n(), self.p.p());
        let x = &z[..n];
        let dim = self.dim();
        let mut jac = DMatrix::zeros(dim, dim);
        let mut g = self.p.a().clone();
        let mut row = n;
        if let Some(t) = self.p.f_term() {
            let (xi, grad) = term_at(t, x)?;
            let s = z[self.sigma_f_at()];
            g += t.lambda_op.q() * s;
            let curvature = t.v.second_derivative(xi);
            for c in 0..n {
                jac[(c, self.sigma_f_at())] = grad[c];
                jac[(row, c)] = -curvature * grad[c];
            }
            jac[(row, self.sigma_f_at())] = 1.0;
            row += 1;
        }
        let mut slopes = Vec::with_capacity(pc);
        let mut grads = Vec::with_capacity(pc);
        for (j, t) in self.p.h_terms().iter().enumerate() {
            let (xi, grad) = term_at(t, x)?;
            let si = self.sigma_h_at() + j;
            let ti = self.tau_at() + j;
            let s = z[si];
            let w = self.mu(z, j) + z[ti];
            g += t.lambda_op.q() * (w * s);
            let curvature = t.v.second_derivative(xi);
            for c in 0..n {
                jac[(c, si)] = w * grad[c];
                jac[(c, ti)] = s * grad[c];
                if self.fixed_mu.is_none() {
                    jac[(c, self.mu_at() + j)] = s * grad[c];
                }
                jac[(row, c)] = -curvature * grad[c];
            }
            jac[(row, si)] = 1.0;
            row += 1;
            slopes.push(t.v.derivative(xi));
            grads.push(grad);
        }
        jac.view_mut((0, 0), (n, n)).copy_from(&g);
        for j in 0..pc {
            for c in 0..n {
                jac[(row, c)] = slopes[j] * grads[j][c];
            }
            jac[(row, self.tau_at() + j)] = -self.nu;
            row += 1;
        }
        if self.fixed_mu.is_none() {
            for j in 0..pc {
                for c in 0..n {
                    jac[(row, c)] = slopes[j] * grads[j][c];
                }
                row += 1;
            }
        }
        Some(jac)
    }
}

fn solve_aug(sys: &AugSystem<'_>, cfg: &SolverConfig) -> Result<Vec<AugCriticalPoint>> {
    let p = sys.p;
    cfg.validate(p.n())?;
    if p.m() > 0 {
        return Err(Error::Unsupported(
            "inequality constraints inside the augmented Lagrangian".into(),
        ));
    }
    let (n, pc) = (p.n(), p.p());
    let mut axes: Vec<(f64, f64)> = (0..n).map(|i| cfg.x_interval(i)).collect();
    if sys.fixed_mu.is_none() {
        axes.extend(std::iter::repeat_n(cfg.mu_box, pc));
    }
    let seeds = grid_size(axes.len(), cfg.grid_density)?;
    let opts = cfg.newton_options();

    let outcomes: Vec<std::result::Result<Vec<f64>, f64>> = (0..seeds)
        .into_par_iter()
        .map(|s| {
            let seed = grid_point(&axes, cfg.grid_density, s);
            let x = &seed[..n];
            let mu: Vec<f64> = match sys.fixed_mu {
                Some(m) => m.to_vec(),
                None => seed[n..].to_vec(),
            };
            let start = (|| -> Result<Vec<f64>> {
                let h = p.equality_values(x)?;
                let tau: Vec<f64> = h.iter().map(|v| v / sys.nu).collect();
                let canonical = |t: &crate::model::CanonicalTerm| -> Result<f64> {
                    t.v.dual_of(t.lambda_op.eval(x)?)
                };
                let sigma_f = p.f_term().map(canonical).transpose()?;
                let sigma_h: Vec<f64> = p.h_terms().iter().map(canonical).collect::<Result<_>>()?;
                Ok(sys.pack(x, &mu, &tau, sigma_f, &sigma_h))
            })()
            .map_err(|_| f64::INFINITY)?;
            newton::solve(sys, start, opts)
                .map(|c| c.z)
                .map_err(|f| f.residual_inf())
        })
        .collect();

    let key = |z: &[f64]| -> Vec<f64> { z[..sys.sigma_f_at()].to_vec() };
    let mut kept: Vec<Vec<f64>> = Vec::new();
    let mut best_failure = f64::INFINITY;
    for outcome in outcomes {
        match outcome {
            Ok(z) => {
                let k = key(&z);
                if !kept
                    .iter()
                    .any(|o| same_point(&key(o), &k, cfg.dedup_radius))
                {
                    kept.push(z);
                }
            }
            Err(r) => best_failure = best_failure.min(r),
        }
    }
    let mut points = Vec::with_capacity(kept.len());
    for z in kept {
        let residual = sys
            .residual(&z)
            .map_or(f64::INFINITY, |r| inf_norm(r.as_slice()));
        points.push(sys.finish(&z, residual, cfg)?);
    }
    if points.is_empty() {
        return Err(Error::NoConvergence(format!(
            "{seeds} seeds, best residual {best_failure:.3e}"
        )));
    }
    points.sort_by(|a, b| report_order(a.dual_value, &a.x, b.dual_value, &b.x));
    Ok(points)
}

/// Critical points of the sub-problem `L_{ν,μ_k}` through its canonical dual
/// in `(x, τ, σ)`, with `μ_k` fixed.
pub fn solve_subproblem_dual(
    p: &Problem,
    mu_k: &[f64],
    nu: f64,
    cfg: &SolverConfig,
) -> Result<Vec<AugCriticalPoint>> {
    check_setting(p, nu)?;
    check_len("mu_k", p.p(), mu_k.len())?;
    solve_aug(
        &AugSystem {
            p,
            nu,
            fixed_mu: Some(mu_k),
        },
        cfg,
    )
}

/// Critical points of the full augmented dual with `μ` free.
pub fn solve_full_augmented_dual(
    p: &Problem,
    nu: f64,
    cfg: &SolverConfig,
) -> Result<Vec<AugCriticalPoint>> {
    check_setting(p, nu)?;
    solve_aug(
        &AugSystem {
            p,
            nu,
            fixed_mu: None,
        },
        cfg,
    )
}

/// Global-minimum test `G ≻ 0, μ_k + τ > 0`, with the mirrored
/// biggest-local-max test `G ≺ 0, μ_k + τ < 0`.
pub fn classify_subproblem(pt: &AugCriticalPoint, cfg: &SolverConfig) -> Classification {
    classify_parts(&pt.g_eigenvalues, &pt.mu_plus_tau, &[], cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauZeroCheck {
    pub point: AugCriticalPoint,
    pub tau_abs: f64,
    /// Distance in `(μ, σ)` to the nearest plain-dual critical point.
    pub plain_distance: f64,
}

fn dual_distance(a: &AugCriticalPoint, b: &CriticalPoint) -> f64 {
    let mut d = 0.0_f64;
    for (x, y) in a.mu.iter().zip(&b.dual.mu) {
        d = d.max((x - y).abs());
    }
    for (x, y) in a.sigma_h.iter().zip(&b.dual.sigma_h) {
        d = d.max((x - y).abs());
    }
    if let (Some(x), Some(y)) = (a.sigma_f, b.dual.sigma_f) {
        d = d.max((x - y).abs());
    }
    d
}

/// Solves the full augmented dual and compares each critical point with the
/// plain canonical dual: `τ` should vanish and `(μ, σ)` coincide.
pub fn verify_tau_zero(p: &Problem, nu: f64, cfg: &SolverConfig) -> Result<Vec<TauZeroCheck>> {
    let full = solve_full_augmented_dual(p, nu, cfg)?;
    let plain = solver::solve_critical_points(p, cfg)?;
    Ok(full
        .into_iter()
        .map(|point| {
            let tau_abs = inf_norm(&point.tau);
            let plain_distance = plain
                .iter()
                .map(|q| dual_distance(&point, q))
                .fold(f64::INFINITY, f64::min);
            TauZeroCheck {
                point,
                tau_abs,
                plain_distance,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterIterate {
    pub k: usize,
    pub mu: Vec<f64>,
    pub nu: f64,
    pub x: Vec<f64>,
    pub tau: Vec<f64>,
    pub h_inf: f64,
    pub l_value: f64,
    pub dual_value: Option<f64>,
    pub mu_next: Vec<f64>,
    /// `false` when no sub-problem point was certified and the lowest-L
    /// point was used instead.
    pub certified: bool,
}

/// Multiplier method driven by globally solved sub-problems:
/// `μ_{k+1} = μ_k + τ*`, `ν_{k+1} = α·ν_k`.
pub fn outer_loop(
    p: &Problem,
    cfg: &AugLagConfig,
    scfg: &SolverConfig,
) -> Result<Vec<OuterIterate>> {
    cfg.validate(p.p())?;
    let mut mu = cfg.mu0.clone();
    let mut nu = cfg.nu0;
    let mut history = Vec::new();
    for k in 0..cfg.max_outer_iter {
        let pts = solve_subproblem_dual(p, &mu, nu, scfg)?;
        let lowest_l =
            |a: &&AugCriticalPoint, b: &&AugCriticalPoint| a.l_value.total_cmp(&b.l_value);
        let certified = pts
            .iter()
            .filter(|q| q.classification == Classification::GlobalMinCertified)
            .min_by(lowest_l);
        let (chosen, is_certified) = match certified {
            Some(q) => (q, true),
            None => (pts.iter().min_by(lowest_l).expect("non-empty"), false),
        };
        let h = p.equality_values(&chosen.x)?;
        let h_inf = inf_norm(&h);
        let mu_next: Vec<f64> = mu.iter().zip(&chosen.tau).map(|(m, t)| m + t).collect();
        history.push(OuterIterate {
            k,
            mu: mu.clone(),
            nu,
            x: chosen.x.clone(),
            tau: chosen.tau.clone(),
            h_inf,
            l_value: chosen.l_value,
            dual_value: chosen.dual_value,
            mu_next: mu_next.clone(),
            certified: is_certified,
        });
        if h_inf <= cfg.feasibility_tol {
            break;
        }
        mu = mu_next;
        nu *= cfg.alpha;
    }
    Ok(history)
}
