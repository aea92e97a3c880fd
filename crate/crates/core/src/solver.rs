//! Critical-point enumeration for the total complementarity function.
//!
//! Each inequality branch of the active-set enumeration gives a square system
//!
//! ```text
//! Gx − F = 0,   σ − V′(Λ(x)) = 0,   h(x) = 0,
//! g_i(x) = 0 (active)  or  λ_i = 0 (inactive)
//! ```
//!
//! in `(x, λ, μ, σ_f, σ_g, σ_h)`, solved by damped Newton from a tensor grid
//! of `(x, μ, λ_active)` seeds with σ started on the canonical maps.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::{self, inf_norm, DualPoint};
use crate::model::{eval_objective, Canonical, CanonicalTerm, Problem};
use crate::newton::{self, System};
use crate::{Error, Result};

/// Upper bound on the number of inequalities for active-set enumeration.
pub const ACTIVE_SET_CAP: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    /// `G ≻ 0`, `μ > 0`, `λ ≥ 0`: global minimizer (given `S_a⁺` convex).
    GlobalMinCertified,
    /// `G ≺ 0`, `μ < 0`: the biggest-local-maximizer sign test.
    BiggestLocalMaxCertified,
    /// `G` indefinite.
    Saddle,
    DegenerateMultiplier,
    SingularG,
    /// Definite `G` whose multiplier signs do not match either certificate.
    Unclassified,
}

impl Classification {
    pub fn label(self) -> &'static str {
        match self {
            Self::GlobalMinCertified => "global-min",
            Self::BiggestLocalMaxCertified => "biggest-local-max",
            Self::Saddle => "saddle",
            Self::DegenerateMultiplier => "degenerate-multiplier",
            Self::SingularG => "singular-G",
            Self::Unclassified => "unclassified",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Seed interval per x coordinate; a single entry applies to all.
    pub x_box: Vec<(f64, f64)>,
    pub mu_box: (f64, f64),
    pub lambda_box: (f64, f64),
    pub grid_density: usize,
    pub newton_max_iter: usize,
    pub newton_tol: f64,
    pub dedup_radius: f64,
    pub mu_nonzero_tol: f64,
    pub psd_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            x_box: vec![(-10.0, 10.0)],
            mu_box: (-2.0, 2.0),
            lambda_box: (0.0, 2.0),
            grid_density: 21,
            newton_max_iter: 100,
            newton_tol: 1e-10,
            dedup_radius: 1e-6,
            mu_nonzero_tol: 1e-8,
            psd_tol: 1e-8,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.to_string()));
        if self.grid_density < 2 {
            return bad("grid_density must be at least 2");
        }
        for tol in [
            self.newton_tol,
            self.dedup_radius,
            self.mu_nonzero_tol,
            self.psd_tol,
        ] {
            if !(tol > 0.0 && tol.is_finite()) {
                return bad("all tolerances must be positive and finite");
            }
        }
        if self.newton_max_iter == 0 {
            return bad("newton_max_iter must be positive");
        }
        if self.x_box.len() != 1 && self.x_box.len() != n {
            return Err(Error::DimensionMismatch {
                what: "x seed box",
                expected: n,
                found: self.x_box.len(),
            });
        }
        let boxes = self.x_box.iter().chain([&self.mu_box, &self.lambda_box]);
        for &(lo, hi) in boxes {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return bad("seed intervals must be finite with lo <= hi");
            }
        }
        Ok(())
    }

    pub(crate) fn x_interval(&self, i: usize) -> (f64, f64) {
        if self.x_box.len() == 1 {
            self.x_box[0]
        } else {
            self.x_box[i]
        }
    }

    pub(crate) fn newton_options(&self) -> newton::Options {
        newton::Options {
            max_iter: self.newton_max_iter,
            tol: self.newton_tol,
            max_backtracks: 30,
            backtrack_factor: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub x: Vec<f64>,
    pub dual: DualPoint,
    pub primal_value: f64,
    /// `None` when `G` is singular and `P^d` is undefined.
    pub dual_value: Option<f64>,
    pub xi1_value: f64,
    pub g_eigenvalues: Vec<f64>,
    pub kkt_residual_inf: f64,
    pub classification: Classification,
}

/// Shared classification rule: `weights` are `μ` for the plain dual and
/// `μ_k + τ` for the augmented sub-problem.
pub(crate) fn classify_parts(
    eig: &[f64],
    weights: &[f64],
    lambda: &[f64],
    cfg: &SolverConfig,
) -> Classification {
    let tol = cfg.psd_tol;
    if weights.iter().any(|w| w.abs() < cfg.mu_nonzero_tol) {
        return Classification::DegenerateMultiplier;
    }
    if eig.iter().any(|e| e.abs() <= tol) {
        return Classification::SingularG;
    }
    let min_eig = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let max_eig = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if min_eig > tol && weights.iter().all(|&w| w > tol) && lambda.iter().all(|&l| l >= 0.0) {
        Classification::GlobalMinCertified
    } else if max_eig < -tol && weights.iter().all(|&w| w < -tol) {
        Classification::BiggestLocalMaxCertified
    } else if min_eig < -tol && max_eig > tol {
        Classification::Saddle
    } else {
        Classification::Unclassified
    }
}

pub fn classify(pt: &CriticalPoint, cfg: &SolverConfig) -> Classification {
    classify_parts(&pt.g_eigenvalues, &pt.dual.mu, &pt.dual.lambda, cfg)
}

/// Largest pairwise discrepancy among `P(x̄)`, `Ξ₁` and `P^d` (the latter
/// skipped when undefined).
pub fn verify_gap(pt: &CriticalPoint) -> f64 {
    let mut values = vec![pt.primal_value, pt.xi1_value];
    values.extend(pt.dual_value);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    hi - lo
}

pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Orders by dual value (undefined last), then lexicographically by x.
pub(crate) fn report_order(
    da: Option<f64>,
    xa: &[f64],
    db: Option<f64>,
    xb: &[f64],
) -> std::cmp::Ordering {
    let dual = match (da, db) {
        (Some(a), Some(b)) => a.total_cmp(&b),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    };
    dual.then_with(|| lex_cmp(xa, xb))
}

/// Certified global minimum with the largest dual value; ties go to the
/// lexicographically smallest x.
pub fn select_global(points: &[CriticalPoint]) -> Option<&CriticalPoint> {
    points
        .iter()
        .filter(|p| p.classification == Classification::GlobalMinCertified)
        .filter_map(|p| p.dual_value.map(|d| (d, p)))
        .max_by(|(da, a), (db, b)| da.total_cmp(db).then_with(|| lex_cmp(&b.x, &a.x)))
        .map(|(_, p)| p)
}

/// Among points carrying the biggest-local-max sign test, the one minimizing
/// the dual value.
pub fn select_biggest_local_max(points: &[CriticalPoint]) -> Option<&CriticalPoint> {
    points
        .iter()
        .filter(|p| p.classification == Classification::BiggestLocalMaxCertified)
        .filter_map(|p| p.dual_value.map(|d| (d, p)))
        .min_by(|(da, a), (db, b)| da.total_cmp(db).then_with(|| lex_cmp(&a.x, &b.x)))
        .map(|(_, p)| p)
}

/// Point `idx` of a tensor grid with `density` points per axis.
pub(crate) fn grid_point(axes: &[(f64, f64)], density: usize, mut idx: usize) -> Vec<f64> {
    axes.iter()
        .map(|&(lo, hi)| {
            let k = idx % density;
            idx /= density;
            lo + (hi - lo) * k as f64 / (density - 1) as f64
        })
        .collect()
}

pub(crate) fn grid_size(dims: usize, density: usize) -> Result<usize> {
    u32::try_from(dims)
        .ok()
        .and_then(|d| density.checked_pow(d))
        .ok_or_else(|| Error::InvalidParameter("seed grid too large".into()))
}

/// `true` when `a` and `b` agree to `radius·(1 + max(‖a‖∞, ‖b‖∞))`.
pub(crate) fn same_point(a: &[f64], b: &[f64], radius: f64) -> bool {
    let scale = 1.0 + inf_norm(a).max(inf_norm(b));
    a.iter()
        .zip(b)
        .all(|(x, y)| (x - y).abs() <= radius * scale)
}

/// Per-term pieces at x: `(ξ, ∇Λ(x))`, or `None` outside V's domain.
pub(crate) fn term_at(t: &CanonicalTerm, x: &[f64]) -> Option<(f64, DVector<f64>)> {
    let xi = t.lambda_op.eval_unchecked(x);
    t.v.in_domain(xi)
        .then(|| (xi, t.lambda_op.gradient_unchecked(x)))
}

/// The square KKT system for one active-set branch.
struct KktSystem<'a> {
    p: &'a Problem,
    active: Vec<bool>,
}

struct Layout {
    n: usize,
    m: usize,
    p: usize,
    has_f: bool,
}

impl Layout {
    fn of(p: &Problem) -> Self {
        Self {
            n: p.n(),
            m: p.m(),
            p: p.p(),
            has_f: p.f_term().is_some(),
        }
    }
    fn lambda(&self) -> usize {
        self.n
    }
    fn mu(&self) -> usize {
        self.n + self.m
    }
    fn sigma_f(&self) -> usize {
        self.n + self.m + self.p
    }
    fn sigma_g(&self) -> usize {
        self.sigma_f() + usize::from(self.has_f)
    }
    fn sigma_h(&self) -> usize {
        self.sigma_g() + self.m
    }
    fn dim(&self) -> usize {
        self.sigma_h() + self.p
    }

    fn pack(&self, x: &[f64], d: &DualPoint) -> Vec<f64> {
        let mut z = Vec::with_capacity(self.dim());
        z.extend_from_slice(x);
        z.extend_from_slice(&d.lambda);
        z.extend_from_slice(&d.mu);
        z.extend(d.sigma_f);
        z.extend_from_slice(&d.sigma_g);
        z.extend_from_slice(&d.sigma_h);
        z
    }

    fn unpack(&self, z: &[f64]) -> (Vec<f64>, DualPoint) {
        let d = DualPoint {
            sigma_f: self.has_f.then(|| z[self.sigma_f()]),
            lambda: z[self.lambda()..self.mu()].to_vec(),
            mu: z[self.mu()..self.sigma_f()].to_vec(),
            sigma_g: z[self.sigma_g()..self.sigma_h()].to_vec(),
            sigma_h: z[self.sigma_h()..self.dim()].to_vec(),
        };
        (z[..self.n].to_vec(), d)
    }
}

impl KktSystem<'_> {
    /// `(term, weight index, σ index)` for every canonical term.
    fn terms(&self, l: &Layout) -> Vec<(&CanonicalTerm, Option<usize>, usize)> {
        let mut out = Vec::with_capacity(1 + l.m + l.p);
        if let Some(t) = self.p.f_term() {
            out.push((t, None, l.sigma_f()));
        }
        for (i, t) in self.p.g_terms().iter().enumerate() {
            out.push((t, Some(l.lambda() + i), l.sigma_g() + i));
        }
        for (j, t) in self.p.h_terms().iter().enumerate() {
            out.push((t, Some(l.mu() + j), l.sigma_h() + j));
        }
        out
    }
}

impl System for KktSystem<'_> {
    fn dim(&self) -> usize {
        Layout::of(self.p).dim()
    }

    fn residual(&self, z: &[f64]) -> Option<DVector<f64>> {
        let l = Layout::of(self.p);
        let x = &z[..l.n];
        let xv = DVector::from_column_slice(x);
        let mut r = DVector::zeros(l.dim());
        let mut rx = self.p.a() * &xv - self.p.c();
        let mut row = l.n;
        let mut map_rows = Vec::new();
        let mut values = Vec::new();
        for (t, wi, si) in self.terms(&l) {
            let (xi, grad) = term_at(t, x)?;
            let sigma = z[si];
            if !t.v.in_dual_domain(sigma) {
                return None;
            }
            let w = wi.map_or(1.0, |i| z[i]);
            rx += grad * (w * sigma);
            map_rows.push(sigma - t.v.derivative(xi));
            values.push(t.v.value(xi));
        }
        r.rows_mut(0, l.n).copy_from(&rx);
        for v in map_rows {
            r[row] = v;
            row += 1;
        }
        // equality rows, then inequality rows
        let offset_h = usize::from(l.has_f) + l.m;
        for j in 0..l.p {
            r[row] = values[offset_h + j];
            row += 1;
        }
        let offset_g = usize::from(l.has_f);
        for i in 0..l.m {
            r[row] = if self.active[i] {
                values[offset_g + i]
            } else {
                z[l.lambda() + i]
            };
            row += 1;
        }
        Some(r)
    }

    fn jacobian(&self, z: &[f64]) -> Option<DMatrix<f64>> {
        let l = Layout::of(self.p);
        let x = &z[..l.n];
        let dim = l.dim();
        let mut jac = DMatrix::zeros(dim, dim);
        // ∂(Gx − F)/∂x = G
        let mut g = self.p.a().clone();
        let terms = self.terms(&l);
        let mut slopes = Vec::with_capacity(terms.len());
        let mut grads = Vec::with_capacity(terms.len());
        for (k, &(t, wi, si)) in terms.iter().enumerate() {
            let (xi, grad) = term_at(t, x)?;
            let sigma = z[si];
            let w = wi.map_or(1.0, |i| z[i]);
            g += t.lambda_op.q() * (w * sigma);
            for r in 0..l.n {
                jac[(r, si)] = w * grad[r];
                if let Some(i) = wi {
                    jac[(r, i)] = sigma * grad[r];
                }
            }
            // canonical-map row
            let map_row = l.n + k;
            let curvature = t.v.second_derivative(xi);
            for c in 0..l.n {
                jac[(map_row, c)] = -curvature * grad[c];
            }
            jac[(map_row, si)] = 1.0;
            slopes.push(t.v.derivative(xi));
            grads.push(grad);
        }
        jac.view_mut((0, 0), (l.n, l.n)).copy_from(&g);
        let mut row = l.n + terms.len();
        let offset_h = usize::from(l.has_f) + l.m;
        for j in 0..l.p {
            let k = offset_h + j;
            for c in 0..l.n {
                jac[(row, c)] = slopes[k] * grads[k][c];
            }
            row += 1;
        }
        let offset_g = usize::from(l.has_f);
        for i in 0..l.m {
            if self.active[i] {
                let k = offset_g + i;
                for c in 0..l.n {
                    jac[(row, c)] = slopes[k] * grads[k][c];
                }
            } else {
                jac[(row, l.lambda() + i)] = 1.0;
            }
            row += 1;
        }
        Some(jac)
    }
}

/// Builds a fully evaluated [`CriticalPoint`] from a converged `(x, dual)`.
pub fn critical_point(
    p: &Problem,
    x: Vec<f64>,
    dual: DualPoint,
    cfg: &SolverConfig,
) -> Result<CriticalPoint> {
    let aq = assembly::assemble(p, &dual)?;
    let g_eigenvalues = aq.eigenvalues();
    let dual_value = assembly::dual_value_of(&aq).ok();
    let xi1_value = assembly::eval_xi1(p, &x, &dual)?;
    let primal_value = eval_objective(p, &x)?;
    let kkt_residual_inf = inf_norm(&assembly::stationarity_residual(p, &x, &dual)?);
    let classification = classify_parts(&g_eigenvalues, &dual.mu, &dual.lambda, cfg);
    Ok(CriticalPoint {
        x,
        dual,
        primal_value,
        dual_value,
        xi1_value,
        g_eigenvalues,
        kkt_residual_inf,
        classification,
    })
}

/// Enumerates deduplicated critical points of `Ξ₁` over every active-set
/// branch, sorted by dual value then x.
pub fn solve_critical_points(p: &Problem, cfg: &SolverConfig) -> Result<Vec<CriticalPoint>> {
    cfg.validate(p.n())?;
    if p.m() > ACTIVE_SET_CAP {
        return Err(Error::ActiveSetExplosion {
            m: p.m(),
            cap: ACTIVE_SET_CAP,
        });
    }
    let l = Layout::of(p);
    let lambda_box = (cfg.lambda_box.0.max(0.0), cfg.lambda_box.1.max(0.0));

    let mut tasks = Vec::new();
    for mask in 0..(1usize << l.m) {
        let active: Vec<bool> = (0..l.m).map(|i| mask & (1 << i) != 0).collect();
        let n_active = active.iter().filter(|&&a| a).count();
        let mut axes: Vec<(f64, f64)> = (0..l.n).map(|i| cfg.x_interval(i)).collect();
        axes.extend(std::iter::repeat_n(cfg.mu_box, l.p));
        axes.extend(std::iter::repeat_n(lambda_box, n_active));
        let seeds = grid_size(axes.len(), cfg.grid_density)?;
        tasks.push((active, axes, seeds));
    }
    let jobs: Vec<(usize, usize)> = tasks
        .iter()
        .enumerate()
        .flat_map(|(b, t)| (0..t.2).map(move |s| (b, s)))
        .collect();

    let opts = cfg.newton_options();
    let outcomes: Vec<std::result::Result<Vec<f64>, f64>> = jobs
        .par_iter()
        .map(|&(b, s)| {
            let (active, axes, _) = &tasks[b];
            let seed = grid_point(axes, cfg.grid_density, s);
            let x = &seed[..l.n];
            let mu = seed[l.n..l.n + l.p].to_vec();
            let mut active_seeds = seed[l.n + l.p..].iter();
            let lambda: Vec<f64> = active
                .iter()
                .map(|&a| {
                    if a {
                        *active_seeds.next().unwrap()
                    } else {
                        0.0
                    }
                })
                .collect();
            let d0 = DualPoint::canonical_at(p, x, lambda, mu).map_err(|_| f64::INFINITY)?;
            let sys = KktSystem {
                p,
                active: active.clone(),
            };
            let conv = newton::solve(&sys, l.pack(x, &d0), opts).map_err(|f| f.residual_inf())?;
            Ok(conv.z)
        })
        .collect();

    let mut best_failure = f64::INFINITY;
    let mut kept: Vec<(Vec<f64>, DualPoint)> = Vec::new();
    for outcome in outcomes {
        let z = match outcome {
            Ok(z) => z,
            Err(r) => {
                best_failure = best_failure.min(r);
                continue;
            }
        };
        let (x, d) = l.unpack(&z);
        if d.lambda.iter().any(|&v| v < -cfg.newton_tol) {
            continue;
        }
        let key: Vec<f64> = x.iter().chain(&d.lambda).chain(&d.mu).copied().collect();
        let duplicate = kept.iter().any(|(kx, kd)| {
            let other: Vec<f64> = kx.iter().chain(&kd.lambda).chain(&kd.mu).copied().collect();
            same_point(&key, &other, cfg.dedup_radius)
        });
        if !duplicate {
            kept.push((x, d));
        }
    }

    let mut points = Vec::new();
    for (x, d) in kept {
        let pt = critical_point(p, x, d, cfg)?;
        if pt.kkt_residual_inf <= cfg.newton_tol {
            points.push(pt);
        }
    }
    if points.is_empty() {
        return Err(Error::NoConvergence(format!(
            "{} seeds over {} active-set branches, best residual {:.3e}",
            jobs.len(),
            tasks.len(),
            best_failure
        )));
    }
    points.sort_by(|a, b| report_order(a.dual_value, &a.x, b.dual_value, &b.x));
    Ok(points)
}
