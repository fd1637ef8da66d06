//! Unit sigma-point sets for the classical Gaussian quadrature rules.
//!
//! Every rule here lives in standard-Gaussian space: the points `ξᵢ` integrate
//! against `N(0, I)`, and the transforms map them onto an arbitrary Gaussian
//! with `xᵢ = m + L·ξᵢ`.
//!
//! Column order is fixed so that tables and golden values are reproducible:
//! UT and SR use `[0?, +c·e₁, …, +c·e_D, −c·e₁, …, −c·e_D]`, and the
//! Gauss–Hermite grid is enumerated in row-major Cartesian-product order
//! (the first coordinate varies slowest).

use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Default cap on the size of tensor-product grids.
pub const DEFAULT_POINT_BUDGET: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rule {
    Unscented { kappa: f64 },
    ScaledUnscented { kappa: f64, alpha: f64, beta: f64 },
    SphericalRadial,
    GaussHermite { order: usize },
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Unscented { .. } => write!(f, "UT"),
            Rule::ScaledUnscented { .. } => write!(f, "UT-scaled"),
            Rule::SphericalRadial => write!(f, "SR"),
            Rule::GaussHermite { order } => write!(f, "GH-{order}"),
        }
    }
}

impl Rule {
    /// Unit point set of this rule in `dim` dimensions.
    pub fn points(&self, dim: usize) -> Result<UnitPointSet> {
        match *self {
            Rule::Unscented { kappa } => ut_points(dim, kappa),
            Rule::ScaledUnscented { kappa, alpha, beta } => scaled_ut_points(dim, kappa, alpha, beta),
            Rule::SphericalRadial => sr_points(dim),
            Rule::GaussHermite { order } => gh_points(dim, order),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitPointSet {
    /// D×N matrix, one unit sigma-point per column.
    pub points: DMatrix<f64>,
    pub mean_weights: DVector<f64>,
    /// Equal to `mean_weights` for every rule except the scaled UT.
    pub cov_weights: DVector<f64>,
    pub rule: Rule,
}

impl UnitPointSet {
    pub fn dim(&self) -> usize {
        self.points.nrows()
    }

    pub fn len(&self) -> usize {
        self.points.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.points.ncols() == 0
    }
}

fn symmetric_set(dim: usize, c: f64, center: bool) -> DMatrix<f64> {
    let offset = usize::from(center);
    let mut pts = DMatrix::zeros(dim, 2 * dim + offset);
    for d in 0..dim {
        pts[(d, offset + d)] = c;
        pts[(d, offset + dim + d)] = -c;
    }
    pts
}

/// Unscented transform points, `N = 2D + 1`.
pub fn ut_points(dim: usize, kappa: f64) -> Result<UnitPointSet> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    let scale = dim as f64 + kappa;
    if !(scale > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "dim + kappa must be positive (dim = {dim}, kappa = {kappa})"
        )));
    }
    let points = symmetric_set(dim, scale.sqrt(), true);
    let mut w = DVector::from_element(2 * dim + 1, 1.0 / (2.0 * scale));
    w[0] = kappa / scale;
    Ok(UnitPointSet {
        points,
        cov_weights: w.clone(),
        mean_weights: w,
        rule: Rule::Unscented { kappa },
    })
}

/// Scaled unscented transform with `λ = α²(D + κ) − D`.
///
/// Only the centre covariance weight differs from the mean weights:
/// `w₀ᶜ = w₀ + 1 − α² + β`.
pub fn scaled_ut_points(dim: usize, kappa: f64, alpha: f64, beta: f64) -> Result<UnitPointSet> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    if !(alpha > 0.0) || !beta.is_finite() || !kappa.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "scaled UT needs alpha > 0 and finite kappa, beta (alpha = {alpha})"
        )));
    }
    let n = dim as f64;
    let lambda = alpha * alpha * (n + kappa) - n;
    let scale = n + lambda;
    if !(scale > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "dim + lambda must be positive (lambda = {lambda})"
        )));
    }
    let points = symmetric_set(dim, scale.sqrt(), true);
    let mut wm = DVector::from_element(2 * dim + 1, 1.0 / (2.0 * scale));
    wm[0] = lambda / scale;
    let mut wc = wm.clone();
    wc[0] += 1.0 - alpha * alpha + beta;
    Ok(UnitPointSet {
        points,
        mean_weights: wm,
        cov_weights: wc,
        rule: Rule::ScaledUnscented { kappa, alpha, beta },
    })
}

/// Spherical-radial (cubature) points, `N = 2D`, no centre point.
pub fn sr_points(dim: usize) -> Result<UnitPointSet> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    let points = symmetric_set(dim, (dim as f64).sqrt(), false);
    let w = DVector::from_element(2 * dim, 1.0 / (2.0 * dim as f64));
    Ok(UnitPointSet {
        points,
        cov_weights: w.clone(),
        mean_weights: w,
        rule: Rule::SphericalRadial,
    })
}

/// Probabilists' Hermite polynomial `He_n(x)` by the three-term recurrence.
pub fn hermite_he(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = x * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `He_n(x) / √(n!)`, which stays O(1) near the nodes for large `n`.
fn hermite_normalized(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = (x * cur - (k as f64).sqrt() * prev) / ((k + 1) as f64).sqrt();
        prev = cur;
        cur = next;
    }
    cur
}

/// One-dimensional Gauss–Hermite rule for the standard Gaussian weight.
///
/// Nodes are the eigenvalues of the symmetric Jacobi matrix of the
/// probabilists' Hermite recurrence, refined by Newton steps. Weights are
/// `r! / [r·He_{r−1}(x)]²`, evaluated in the equivalent Christoffel form
/// `1 / Σ_{k<r} h_k(x)²` with the normalized polynomials `h_k`.
pub fn hermite_rule_1d(order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if order == 0 {
        return Err(Error::InvalidParameter("Gauss-Hermite order must be at least 1".into()));
    }
    let jacobi = DMatrix::from_fn(order, order, |i, j| {
        if i + 1 == j || j + 1 == i {
            (i.max(j) as f64).sqrt()
        } else {
            0.0
        }
    });
    let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    nodes.sort_by(f64::total_cmp);
    // Newton polish on h_r, using h_r' = √r·h_{r−1}
    for x in nodes.iter_mut() {
        for _ in 0..2 {
            let d = (order as f64).sqrt() * hermite_normalized(order - 1, *x);
            if d != 0.0 {
                *x -= hermite_normalized(order, *x) / d;
            }
        }
    }
    // enforce exact symmetry about the origin
    for i in 0..order / 2 {
        let half = 0.5 * (nodes[order - 1 - i] - nodes[i]);
        nodes[i] = -half;
        nodes[order - 1 - i] = half;
    }
    if order % 2 == 1 {
        nodes[order / 2] = 0.0;
    }
    let weights = nodes
        .iter()
        .map(|&x| {
            // Christoffel function: 1 / Σ_{k<r} h_k(x)²
            let (mut prev, mut cur) = (1.0, x);
            let mut acc = 1.0;
            for k in 1..order {
                acc += cur * cur;
                let next = (x * cur - (k as f64).sqrt() * prev) / ((k + 1) as f64).sqrt();
                prev = cur;
                cur = next;
            }
            1.0 / acc
        })
        .collect();
    Ok((nodes, weights))
}

pub fn gh_points(dim: usize, order: usize) -> Result<UnitPointSet> {
    gh_points_with_budget(dim, order, DEFAULT_POINT_BUDGET)
}

/// Tensor-product Gauss–Hermite grid with `N = order^dim` points.
pub fn gh_points_with_budget(dim: usize, order: usize, budget: usize) -> Result<UnitPointSet> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    let requested = (order as u128).checked_pow(dim as u32).unwrap_or(u128::MAX);
    if requested > budget as u128 {
        return Err(Error::ResourceLimit {
            requested,
            limit: budget,
        });
    }
    let (nodes, weights) = hermite_rule_1d(order)?;
    let n = requested as usize;
    let mut points = DMatrix::zeros(dim, n);
    let mut w = DVector::from_element(n, 1.0);
    for col in 0..n {
        let mut rem = col;
        for d in (0..dim).rev() {
            let idx = rem % order;
            rem /= order;
            points[(d, col)] = nodes[idx];
            w[col] *= weights[idx];
        }
    }
    Ok(UnitPointSet {
        points,
        cov_weights: w.clone(),
        mean_weights: w,
        rule: Rule::GaussHermite { order },
    })
}
