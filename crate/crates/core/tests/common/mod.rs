//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use canondual::cli::problem_file::ProblemFile;
use canondual::model::{CanonicalFunction, CanonicalTerm, Problem, QuadraticOperator};
use nalgebra::{DMatrix, DVector};

/// Reference critical points of the double-well example, in dual-value
/// order: `(x, μ, σ, f, P^d, G)`.
pub const DOUBLE_WELL_POINTS: [[f64; 6]; 4] = [
    [1.023, 0.004, -5.48, -0.5, -0.5, 0.98],
    [-1.023, 0.36, -5.48, 1.55, 1.55, -0.98],
    [4.791, -0.14, 5.48, 6.69, 6.69, 0.21],
    [-4.791, -0.22, 5.48, 16.27, 16.27, -0.21],
];

/// Reference sub-problem points at `μ_k = 1`, `ν = 5`, unsorted:
/// `(x, τ, σ, L, P^d, G, μ+τ)`.
pub const PENALIZED_POINTS: [[f64; 7]; 7] = [
    [1.69, -0.91, -4.57, -2.74, -2.74, 0.59, 0.09],
    [-1.52, -0.66, -4.84, 0.48, 0.48, -0.66, 0.34],
    [4.53, -1.18, 0.36, 3.32, 3.32, 1.88, -0.18],
    [-4.50, -1.30, 4.13, 12.35, 12.35, -0.22, -0.30],
    [-0.12, 0.59, -5.99, 3.72, 3.72, -8.54, 1.59],
    [-3.65, -2.96, 0.65, 17.38, 17.38, -0.27, -1.96],
    [3.57, -2.99, 0.36, 10.16, 10.16, 0.28, -1.99],
];

/// Index of the entry in `xs` closest to `x`.
pub fn nearest(xs: &[f64], x: f64) -> usize {
    (0..xs.len())
        .min_by(|&a, &b| (xs[a] - x).abs().total_cmp(&(xs[b] - x).abs()))
        .expect("non-empty")
}

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn fixture(name: &str) -> Problem {
    let text = std::fs::read_to_string(fixture_path(name)).expect("fixture readable");
    ProblemFile::parse(&text)
        .and_then(|f| f.to_problem())
        .expect("fixture valid")
}

/// `min ½qx² − cx  s.t.  ½(½x² − d)² − e = 0`.
pub fn double_well(q: f64, c: f64, d: f64, e: f64) -> Problem {
    let h = CanonicalTerm::new(
        CanonicalFunction::shifted_quadratic(1.0, d, -e).unwrap(),
        QuadraticOperator::half_square(),
    );
    Problem::new(DMatrix::from_element(1, 1, q), DVector::from_element(1, c))
        .unwrap()
        .with_equality(h)
        .unwrap()
}

pub fn example_one() -> Problem {
    double_well(1.0, 1.0, 6.0, 15.0)
}

/// Linear operator `Λ(x) = bᵀx`.
pub fn linear(b: &[f64]) -> QuadraticOperator {
    let n = b.len();
    QuadraticOperator::new(DMatrix::zeros(n, n), DVector::from_column_slice(b), 0.0).unwrap()
}
