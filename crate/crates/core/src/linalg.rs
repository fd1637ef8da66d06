//! Small dense linear-algebra helpers shared by the transforms and filters.

use nalgebra::{Cholesky, DMatrix, Dyn};

/// Cholesky factor plus the diagonal jitter that had to be added to obtain it.
pub struct Factor {
    pub chol: Cholesky<f64, Dyn>,
    pub jitter: f64,
}

/// Factorizes `m`; if that fails once, retries with `jitter * I` added.
pub fn cholesky_with_jitter(m: &DMatrix<f64>, jitter: f64) -> Option<Factor> {
    if let Some(chol) = Cholesky::new(m.clone()) {
        return Some(Factor { chol, jitter: 0.0 });
    }
    if !(jitter > 0.0) {
        return None;
    }
    let mut shifted = m.clone();
    for i in 0..shifted.nrows() {
        shifted[(i, i)] += jitter;
    }
    Cholesky::new(shifted).map(|chol| Factor { chol, jitter })
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn symmetrize_in_place(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

/// Eigenvalues of the symmetric part of `m`.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    symmetrize(m).symmetric_eigenvalues().iter().copied().collect()
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    sym_eigenvalues(m)
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

/// Largest absolute eigenvalue (spectral norm for symmetric matrices).
pub fn sym_norm(m: &DMatrix<f64>) -> f64 {
    sym_eigenvalues(m)
        .into_iter()
        .fold(0.0, |acc, v| acc.max(v.abs()))
}

/// `min eig(m) >= -rel_tol * ||m||`.
pub fn is_psd(m: &DMatrix<f64>, rel_tol: f64) -> bool {
    let eig = sym_eigenvalues(m);
    let norm = eig.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    min >= -rel_tol * norm
}

/// Relative asymmetry `max|m - mᵀ| / max(1, max|m|)`.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let scale = m.amax().max(1.0);
    (m - m.transpose()).amax() / scale
}
