//! The x-quadratic structure of the total complementarity function.
//!
//! For a dual point `(σ_f, λ, μ, σ_g, σ_h)`,
//!
//! ```text
//! Ξ₁(x) = Σ w·(σ·Λ(x) − V*(σ)) + ½xᵀAx − cᵀx = ½xᵀGx − Fᵀx + k
//! ```
//!
//! with weights `w = 1` for the objective term, `λ_i` for inequalities and
//! `μ_j` for equalities. The augmented-Lagrangian code reuses the same
//! assembly with weights `μ_k + τ_j`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::linalg;
use crate::model::{check_len, CanonicalTerm, Problem};
use crate::{Error, Result};

/// Full dual coordinate `(σ₀, σ₁) = ((λ, μ), (σ_f, σ_g, σ_h))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualPoint {
    pub sigma_f: Option<f64>,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub sigma_g: Vec<f64>,
    pub sigma_h: Vec<f64>,
}

impl DualPoint {
    /// All-zero dual point shaped for `p`.
    pub fn zeros(p: &Problem) -> Self {
        Self {
            sigma_f: p.f_term().map(|_| 0.0),
            lambda: vec![0.0; p.m()],
            mu: vec![0.0; p.p()],
            sigma_g: vec![0.0; p.m()],
            sigma_h: vec![0.0; p.p()],
        }
    }

    /// Dual point whose σ components come from the canonical maps at `x`.
    pub fn canonical_at(p: &Problem, x: &[f64], lambda: Vec<f64>, mu: Vec<f64>) -> Result<Self> {
        let map = |t: &CanonicalTerm| -> Result<f64> { t.v.dual_of(t.lambda_op.eval(x)?) };
        let d = Self {
            sigma_f: p.f_term().map(map).transpose()?,
            sigma_g: p.g_terms().iter().map(map).collect::<Result<_>>()?,
            sigma_h: p.h_terms().iter().map(map).collect::<Result<_>>()?,
            lambda,
            mu,
        };
        d.check_shape(p)?;
        Ok(d)
    }

    pub fn check_shape(&self, p: &Problem) -> Result<()> {
        if self.sigma_f.is_some() != p.f_term().is_some() {
            return Err(Error::DimensionMismatch {
                what: "sigma_f presence",
                expected: usize::from(p.f_term().is_some()),
                found: usize::from(self.sigma_f.is_some()),
            });
        }
        check_len("lambda", p.m(), self.lambda.len())?;
        check_len("sigma_g", p.m(), self.sigma_g.len())?;
        check_len("mu", p.p(), self.mu.len())?;
        check_len("sigma_h", p.p(), self.sigma_h.len())
    }

    /// Membership in `S₀`: `λ ≥ 0` and `|μ_j| ≥ mu_nonzero_tol`.
    pub fn in_s0(&self, mu_nonzero_tol: f64) -> bool {
        self.lambda.iter().all(|&l| l >= 0.0) && self.mu.iter().all(|m| m.abs() >= mu_nonzero_tol)
    }
}

/// `Ξ₁(x) = ½xᵀGx − Fᵀx + k` for a fixed dual point.
#[derive(Debug, Clone, PartialEq)]
pub struct AssembledQuadratic {
    pub g: DMatrix<f64>,
    pub f: DVector<f64>,
    pub k: f64,
}

impl AssembledQuadratic {
    pub fn value(&self, x: &[f64]) -> f64 {
        let xv = DVector::from_column_slice(x);
        0.5 * xv.dot(&(&self.g * &xv)) - self.f.dot(&xv) + self.k
    }

    /// `∇_xΞ₁ = Gx − F`.
    pub fn gradient(&self, x: &[f64]) -> DVector<f64> {
        &self.g * DVector::from_column_slice(x) - &self.f
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::symmetric_eigenvalues(&self.g)
    }
}

/// Weighted view of a dual point shared with the augmented variant.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Weights<'a> {
    pub sigma_f: Option<f64>,
    pub w_g: &'a [f64],
    pub sigma_g: &'a [f64],
    pub w_h: &'a [f64],
    pub sigma_h: &'a [f64],
}

impl<'a> Weights<'a> {
    pub fn of(d: &'a DualPoint) -> Self {
        Self {
            sigma_f: d.sigma_f,
            w_g: &d.lambda,
            sigma_g: &d.sigma_g,
            w_h: &d.mu,
            sigma_h: &d.sigma_h,
        }
    }

    /// `(term, weight, σ)` triples over every canonical term.
    pub fn terms<'p>(
        &self,
        p: &'p Problem,
    ) -> impl Iterator<Item = (&'p CanonicalTerm, f64, f64)> + use<'p, 'a> {
        let f = p.f_term().zip(self.sigma_f).map(|(t, s)| (t, 1.0, s));
        let g = p
            .g_terms()
            .iter()
            .zip(self.w_g.iter().zip(self.sigma_g))
            .map(|(t, (&w, &s))| (t, w, s));
        let h = p
            .h_terms()
            .iter()
            .zip(self.w_h.iter().zip(self.sigma_h))
            .map(|(t, (&w, &s))| (t, w, s));
        f.into_iter().chain(g).chain(h)
    }
}

pub(crate) fn assemble_weighted(p: &Problem, w: Weights<'_>) -> Result<AssembledQuadratic> {
    let mut g = p.a().clone();
    let mut f = p.c().clone();
    let mut k = 0.0;
    for (term, weight, sigma) in w.terms(p) {
        let conj = term.v.eval_conjugate(sigma)?;
        let ws = weight * sigma;
        let op = &term.lambda_op;
        g += op.q() * ws;
        f -= op.b() * ws;
        k += ws * op.alpha() - weight * conj;
    }
    Ok(AssembledQuadratic { g, f, k })
}

/// Direct evaluation `Σ w(σΛ(x) − V*(σ)) − U(x)`, independent of `G` and `F`.
pub(crate) fn xi1_weighted(p: &Problem, x: &[f64], w: Weights<'_>) -> Result<f64> {
    let mut value = p.quadratic_part(x)?;
    for (term, weight, sigma) in w.terms(p) {
        let xi = term.lambda_op.eval(x)?;
        value += weight * (sigma * xi - term.v.eval_conjugate(sigma)?);
    }
    Ok(value)
}

/// Builds `G`, `F` and the dual-only constant `k`.
pub fn assemble(p: &Problem, d: &DualPoint) -> Result<AssembledQuadratic> {
    d.check_shape(p)?;
    assemble_weighted(p, Weights::of(d))
}

/// Unique stationary point `x = G⁻¹F`.
pub fn primal_from_dual(aq: &AssembledQuadratic) -> Result<Vec<f64>> {
    Ok(linalg::solve_symmetric(&aq.g, &aq.f)?.as_slice().to_vec())
}

/// Dual function value `−½FᵀG⁻¹F + k`.
pub fn dual_value_of(aq: &AssembledQuadratic) -> Result<f64> {
    let x = linalg::solve_symmetric(&aq.g, &aq.f)?;
    Ok(-0.5 * aq.f.dot(&x) + aq.k)
}

/// Canonical dual function `P^d` at `d`.
pub fn eval_dual(p: &Problem, d: &DualPoint) -> Result<f64> {
    dual_value_of(&assemble(p, d)?)
}

/// Total complementarity function `Ξ₁(x, d)`.
pub fn eval_xi1(p: &Problem, x: &[f64], d: &DualPoint) -> Result<f64> {
    d.check_shape(p)?;
    xi1_weighted(p, x, Weights::of(d))
}

/// First-order residuals of `Ξ₁`, concatenated as
/// `[Gx−F (n) | σ_f−V_f′ | σ_g−V_g′ (m) | σ_h−V_h′ (p) | h(x) (p) | min(λ,−g) (m)]`.
pub fn stationarity_residual(p: &Problem, x: &[f64], d: &DualPoint) -> Result<Vec<f64>> {
    d.check_shape(p)?;
    check_len("x", p.n(), x.len())?;
    let aq = assemble(p, d)?;
    let mut out: Vec<f64> = aq.gradient(x).iter().copied().collect();
    let map_residual = |t: &CanonicalTerm, sigma: f64| -> Result<f64> {
        Ok(sigma - t.v.dual_of(t.lambda_op.eval(x)?)?)
    };
    if let (Some(t), Some(s)) = (p.f_term(), d.sigma_f) {
        out.push(map_residual(t, s)?);
    }
    for (t, &s) in p.g_terms().iter().zip(&d.sigma_g) {
        out.push(map_residual(t, s)?);
    }
    for (t, &s) in p.h_terms().iter().zip(&d.sigma_h) {
        out.push(map_residual(t, s)?);
    }
    for t in p.h_terms() {
        out.push(t.eval(x)?);
    }
    for (t, &l) in p.g_terms().iter().zip(&d.lambda) {
        out.push(l.min(-t.eval(x)?));
    }
    Ok(out)
}

pub(crate) fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |acc, r| acc.max(r.abs()))
}
