//! Convex canonical functions and their Legendre conjugates.
//!
//! Every catalog entry carries a closed-form conjugate; nothing here is
//! computed numerically except the default second derivative of a
//! user-supplied [`Canonical`] implementation.

use std::fmt;
use std::sync::Arc;

use crate::{Error, Result};

/// Five-function interface of a canonical function `V`.
///
/// Implementors promise that `V` is convex, that `V′` is invertible on the
/// domain and that `conjugate` is the Legendre conjugate `V*`. Convexity is
/// only spot-checked by the property tests.
pub trait Canonical: Send + Sync + fmt::Debug {
    fn value(&self, xi: f64) -> f64;
    fn derivative(&self, xi: f64) -> f64;
    fn conjugate(&self, sigma: f64) -> f64;
    fn conjugate_derivative(&self, sigma: f64) -> f64;

    fn in_domain(&self, xi: f64) -> bool {
        xi.is_finite()
    }

    fn in_dual_domain(&self, sigma: f64) -> bool {
        sigma.is_finite()
    }

    /// `V″(ξ)`, used by the Newton Jacobian. Central difference of `V′`
    /// unless overridden.
    fn second_derivative(&self, xi: f64) -> f64 {
        let h = 1e-6 * (1.0 + xi.abs());
        (self.derivative(xi + h) - self.derivative(xi - h)) / (2.0 * h)
    }
}

/// Catalog of canonical functions plus a hook for user-defined ones.
#[derive(Debug, Clone)]
pub enum CanonicalFunction {
    /// `V(ξ) = ½a(ξ−d)² + e`, `V*(σ) = σ²/(2a) + dσ − e`, with `a > 0`.
    ShiftedQuadratic {
        a: f64,
        d: f64,
        e: f64,
    },
    /// `V(ξ) = exp(ξ)`, `V*(σ) = σ ln σ − σ` on `σ > 0`.
    Exponential,
    Custom(Arc<dyn Canonical>),
}

impl PartialEq for CanonicalFunction {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (
                Self::ShiftedQuadratic { a, d, e },
                Self::ShiftedQuadratic {
                    a: a2,
                    d: d2,
                    e: e2,
                },
            ) => a == a2 && d == d2 && e == e2,
            (Self::Exponential, Self::Exponential) => true,
            (Self::Custom(l), Self::Custom(r)) => Arc::ptr_eq(l, r),
            _ => false,
        }
    }
}

impl CanonicalFunction {
    pub fn shifted_quadratic(a: f64, d: f64, e: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "shifted quadratic curvature must be positive and finite, got {a}"
            )));
        }
        if !(d.is_finite() && e.is_finite()) {
            return Err(Error::InvalidParameter(
                "shifted quadratic shift parameters must be finite".into(),
            ));
        }
        Ok(Self::ShiftedQuadratic { a, d, e })
    }

    pub fn custom(f: impl Canonical + 'static) -> Self {
        Self::Custom(Arc::new(f))
    }

    fn check_primal(&self, xi: f64) -> Result<()> {
        if self.in_domain(xi) {
            Ok(())
        } else {
            Err(Error::Domain {
                what: "xi",
                value: xi,
            })
        }
    }

    fn check_dual(&self, sigma: f64) -> Result<()> {
        if self.in_dual_domain(sigma) {
            Ok(())
        } else {
            Err(Error::Domain {
                what: "sigma",
                value: sigma,
            })
        }
    }

    /// `V(ξ)` with a domain check.
    pub fn eval(&self, xi: f64) -> Result<f64> {
        self.check_primal(xi)?;
        Ok(self.value(xi))
    }

    /// `V′(ξ)` with a domain check; this is the canonical map `ξ ↦ σ`.
    pub fn dual_of(&self, xi: f64) -> Result<f64> {
        self.check_primal(xi)?;
        Ok(self.derivative(xi))
    }

    /// `V*(σ)` with a domain check.
    pub fn eval_conjugate(&self, sigma: f64) -> Result<f64> {
        self.check_dual(sigma)?;
        Ok(self.conjugate(sigma))
    }

    /// `(V*)′(σ)` with a domain check; the inverse canonical map.
    pub fn primal_of(&self, sigma: f64) -> Result<f64> {
        self.check_dual(sigma)?;
        Ok(self.conjugate_derivative(sigma))
    }
}

impl Canonical for CanonicalFunction {
    fn value(&self, xi: f64) -> f64 {
        match self {
            Self::ShiftedQuadratic { a, d, e } => 0.5 * a * (xi - d) * (xi - d) + e,
            Self::Exponential => xi.exp(),
            Self::Custom(f) => f.value(xi),
        }
    }

    fn derivative(&self, xi: f64) -> f64 {
        match self {
            Self::ShiftedQuadratic { a, d, .. } => a * (xi - d),
            Self::Exponential => xi.exp(),
            Self::Custom(f) => f.derivative(xi),
        }
    }

    fn conjugate(&self, sigma: f64) -> f64 {
        match self {
            Self::ShiftedQuadratic { a, d, e } => sigma * sigma / (2.0 * a) + d * sigma - e,
            Self::Exponential => sigma * sigma.ln() - sigma,
            Self::Custom(f) => f.conjugate(sigma),
        }
    }

    fn conjugate_derivative(&self, sigma: f64) -> f64 {
        match self {
            Self::ShiftedQuadratic { a, d, .. } => sigma / a + d,
            Self::Exponential => sigma.ln(),
            Self::Custom(f) => f.conjugate_derivative(sigma),
        }
    }

    fn in_domain(&self, xi: f64) -> bool {
        match self {
            Self::Custom(f) => f.in_domain(xi),
            _ => xi.is_finite(),
        }
    }

    fn in_dual_domain(&self, sigma: f64) -> bool {
        match self {
            Self::ShiftedQuadratic { .. } => sigma.is_finite(),
            Self::Exponential => sigma.is_finite() && sigma > 0.0,
            Self::Custom(f) => f.in_dual_domain(sigma),
        }
    }

    fn second_derivative(&self, xi: f64) -> f64 {
        match self {
            Self::ShiftedQuadratic { a, .. } => *a,
            Self::Exponential => xi.exp(),
            Self::Custom(f) => f.second_derivative(xi),
        }
    }
}

/// `|V(ξ) + V*(V′(ξ)) − ξ·V′(ξ)|`: zero whenever the Fenchel–Young
/// inequality is tight, which it must be at `σ = V′(ξ)`.
pub fn conjugate_roundtrip_check(v: &CanonicalFunction, xi: f64) -> Result<f64> {
    let sigma = v.dual_of(xi)?;
    let conj = v.eval_conjugate(sigma)?;
    Ok((v.value(xi) + conj - xi * sigma).abs())
}
