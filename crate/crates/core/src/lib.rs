//! Canonical dual solver for nonconvex constrained minimization.
//!
//! Problems are posed as
//!
//! ```text
//! min  V_f(Λ_f(x)) + ½xᵀAx − cᵀx
//! s.t. V_gi(Λ_gi(x)) ≤ 0,   V_hj(Λ_hj(x)) = 0
//! ```
//!
//! where every `Λ` is a scalar quadratic operator and every `V` is a convex
//! canonical function with a closed-form Legendre conjugate. Replacing each
//! `V(Λ(x))` by its Fenchel–Young expansion gives a total complementarity
//! function that is quadratic in `x`; its critical points are KKT points of the
//! primal problem and carry no duality gap. The sign of the x-Hessian `G` and of
//! the multipliers certifies the global minimum.
//!
//! Modules:
//! - [`model`]: quadratic operators, canonical functions, problem type.
//! - [`assembly`]: `G(σ)`, `F(σ)`, the dual function and primal recovery.
//! - [`solver`]: critical-point enumeration, gap checks, classification.
//! - [`auglag`]: the augmented-Lagrangian counterpart and its outer loop.
//! - [`oracle`]: brute-force grid and finite-difference cross checks.
//! - [`cli`]: problem files, reports and the command implementations.

pub mod assembly;
pub mod auglag;
pub mod cli;
mod error;
pub mod linalg;
pub mod model;
mod newton;
pub mod oracle;
pub mod solver;

pub use error::{Error, Result};
