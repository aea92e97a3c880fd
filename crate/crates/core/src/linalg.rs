//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut eig: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// Singularity threshold `1e−10·(1 + max|G_ij|)`.
pub fn singularity_threshold(g: &DMatrix<f64>) -> f64 {
    1e-10 * (1.0 + g.amax())
}

/// Smallest singular value of a symmetric matrix, i.e. `min |λ_i|`.
pub fn min_singular_value_symmetric(g: &DMatrix<f64>) -> f64 {
    symmetric_eigenvalues(g)
        .into_iter()
        .map(f64::abs)
        .fold(f64::INFINITY, f64::min)
}

/// Solves `Gx = F` for symmetric `G`, rejecting near-singular `G`.
///
/// Cholesky when `G ≻ 0`, full-pivot LU otherwise.
pub fn solve_symmetric(g: &DMatrix<f64>, f: &DVector<f64>) -> Result<DVector<f64>> {
    let threshold = singularity_threshold(g);
    let min_singular = min_singular_value_symmetric(g);
    if !(min_singular >= threshold) {
        return Err(Error::SingularG {
            min_singular,
            threshold,
        });
    }
    if let Some(chol) = g.clone().cholesky() {
        return Ok(chol.solve(f));
    }
    g.clone().full_piv_lu().solve(f).ok_or(Error::SingularG {
        min_singular,
        threshold,
    })
}

/// General square solve used for Newton steps.
pub(crate) fn solve_general(j: DMatrix<f64>, r: &DVector<f64>) -> Option<DVector<f64>> {
    let step = j.full_piv_lu().solve(r)?;
    step.iter().all(|v| v.is_finite()).then_some(step)
}
