//! Gaussian process quadrature moment transform with an RBF (ARD) kernel.
//!
//! Everything in this module lives in unit sigma-point space, where the input
//! density is `N(0, I)`. The kernel expectations below are the closed forms for
//! that density:
//!
//! ```text
//! q_i   = α² |Λ⁻¹ + I|^{-1/2} exp(−½ ξᵢᵀ (Λ + I)⁻¹ ξᵢ)
//! Q_ij  = α⁴ |2Λ⁻¹ + I|^{-1/2} exp(−½ (ξᵢᵀΛ⁻¹ξᵢ + ξⱼᵀΛ⁻¹ξⱼ − zᵀ(2Λ⁻¹ + I)⁻¹z)),  z = Λ⁻¹(ξᵢ + ξⱼ)
//! R_:j  = q_j (Λ + I)⁻¹ ξⱼ
//! k̄     = α²
//! ```
//!
//! The transformed covariance carries an extra `σ̄²·I` term, the expected GP
//! predictive variance under the input density. Because one GP with shared
//! hyper-parameters models every output, the inflation is isotropic.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::linalg;
use crate::sigma_points::UnitPointSet;
use crate::transform::{
    check_dims, evaluate_columns, map_with_factor, Diagnostics, GaussianDensity, MomentTransform,
    MomentTransformResult, VectorFunction,
};

const KERNEL_JITTER: f64 = 1e-8;
const NEG_VARIANCE_TOL: f64 = 1e-9;

/// RBF kernel scaling `α` and per-dimension lengthscales `ℓ_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct RbfKernelParams {
    pub alpha: f64,
    pub lengthscales: Vec<f64>,
}

impl RbfKernelParams {
    pub fn new(alpha: f64, lengthscales: Vec<f64>) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("kernel scaling must be positive, got {alpha}")));
        }
        if lengthscales.is_empty() {
            return Err(Error::InvalidParameter("at least one lengthscale is required".into()));
        }
        if let Some(l) = lengthscales.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidParameter(format!("lengthscales must be positive, got {l}")));
        }
        Ok(Self { alpha, lengthscales })
    }

    /// Same lengthscale along every dimension.
    pub fn isotropic(alpha: f64, lengthscale: f64, dim: usize) -> Result<Self> {
        Self::new(alpha, vec![lengthscale; dim])
    }

    /// Expands a single lengthscale to `dim` entries; otherwise the length must match.
    pub fn for_dim(&self, dim: usize) -> Result<Self> {
        match self.lengthscales.len() {
            n if n == dim => Ok(self.clone()),
            1 => Self::isotropic(self.alpha, self.lengthscales[0], dim),
            n => Err(Error::DimensionMismatch(format!(
                "{n} lengthscales given for a {dim}-dimensional input"
            ))),
        }
    }

    pub fn dim(&self) -> usize {
        self.lengthscales.len()
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if dim != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "kernel has {} lengthscales, points have dimension {dim}",
                self.dim()
            )));
        }
        Ok(())
    }

    fn inv_sq(&self) -> impl Iterator<Item = f64> + '_ {
        self.lengthscales.iter().map(|l| 1.0 / (l * l))
    }
}

pub fn rbf_kernel(xi: &[f64], xj: &[f64], params: &RbfKernelParams) -> f64 {
    debug_assert_eq!(xi.len(), params.dim());
    debug_assert_eq!(xj.len(), params.dim());
    let quad: f64 = xi
        .iter()
        .zip(xj)
        .zip(params.inv_sq())
        .map(|((a, b), il)| (a - b) * (a - b) * il)
        .sum();
    params.alpha * params.alpha * (-0.5 * quad).exp()
}

/// Gram matrix of the sigma-points together with its Cholesky factor.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    pub k: DMatrix<f64>,
    pub jitter_used: f64,
    chol: Cholesky<f64, Dyn>,
}

impl KernelMatrix {
    pub fn solve(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.chol.solve(b)
    }

    pub fn solve_vec(&self, b: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(b)
    }
}

fn column(points: &DMatrix<f64>, i: usize) -> Vec<f64> {
    points.column(i).iter().copied().collect()
}

fn kernel_vector(points: &DMatrix<f64>, x: &[f64], params: &RbfKernelParams) -> DVector<f64> {
    DVector::from_fn(points.ncols(), |i, _| rbf_kernel(&column(points, i), x, params))
}

pub fn kernel_matrix(points: &DMatrix<f64>, params: &RbfKernelParams) -> Result<KernelMatrix> {
    params.check_dim(points.nrows())?;
    let n = points.ncols();
    if n == 0 {
        return Err(Error::InvalidParameter("no sigma-points".into()));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (points.column(i) - points.column(j)).norm_squared() == 0.0 {
                return Err(Error::IllConditionedKernel(format!(
                    "sigma-points {i} and {j} coincide"
                )));
            }
        }
    }
    let cols: Vec<Vec<f64>> = (0..n).map(|i| column(points, i)).collect();
    let k = DMatrix::from_fn(n, n, |i, j| rbf_kernel(&cols[i], &cols[j], params));
    let jitter = KERNEL_JITTER * params.alpha * params.alpha;
    let factor = linalg::cholesky_with_jitter(&k, jitter).ok_or_else(|| {
        Error::IllConditionedKernel("kernel matrix not positive definite after jitter".into())
    })?;
    Ok(KernelMatrix {
        k,
        jitter_used: factor.jitter,
        chol: factor.chol,
    })
}

pub fn kernel_mean_vector(points: &DMatrix<f64>, params: &RbfKernelParams) -> Result<DVector<f64>> {
    params.check_dim(points.nrows())?;
    let a2 = params.alpha * params.alpha;
    // |Λ⁻¹ + I|^{-1/2}
    let det: f64 = params.inv_sq().map(|il| (il + 1.0).powf(-0.5)).product();
    let shrink: Vec<f64> = params.lengthscales.iter().map(|l| 1.0 / (l * l + 1.0)).collect();
    Ok(DVector::from_fn(points.ncols(), |i, _| {
        let quad: f64 = points
            .column(i)
            .iter()
            .zip(&shrink)
            .map(|(x, s)| x * x * s)
            .sum();
        a2 * det * (-0.5 * quad).exp()
    }))
}

pub fn kernel_cov_matrix(points: &DMatrix<f64>, params: &RbfKernelParams) -> Result<DMatrix<f64>> {
    params.check_dim(points.nrows())?;
    let a4 = params.alpha.powi(4);
    let inv_sq: Vec<f64> = params.inv_sq().collect();
    // |2Λ⁻¹ + I|^{-1/2}
    let det: f64 = inv_sq.iter().map(|il| (2.0 * il + 1.0).powf(-0.5)).product();
    let n = points.ncols();
    let self_quad: Vec<f64> = (0..n)
        .map(|i| {
            points
                .column(i)
                .iter()
                .zip(&inv_sq)
                .map(|(x, il)| x * x * il)
                .sum()
        })
        .collect();
    let mut q = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let zquad: f64 = (0..params.dim())
                .map(|d| {
                    let z = inv_sq[d] * (points[(d, i)] + points[(d, j)]);
                    z * z / (2.0 * inv_sq[d] + 1.0)
                })
                .sum();
            let v = a4 * det * (-0.5 * (self_quad[i] + self_quad[j] - zquad)).exp();
            q[(i, j)] = v;
            q[(j, i)] = v;
        }
    }
    Ok(q)
}

pub fn kernel_cross_matrix(points: &DMatrix<f64>, params: &RbfKernelParams) -> Result<DMatrix<f64>> {
    let q = kernel_mean_vector(points, params)?;
    let mut r = DMatrix::zeros(points.nrows(), points.ncols());
    for j in 0..points.ncols() {
        for (d, l) in params.lengthscales.iter().enumerate() {
            r[(d, j)] = q[j] * points[(d, j)] / (l * l + 1.0);
        }
    }
    Ok(r)
}

/// `E[k(x, x)]` under `N(0, I)`; constant `α²` for a stationary kernel.
pub fn kernel_expected_diag(params: &RbfKernelParams) -> f64 {
    params.alpha * params.alpha
}

/// Clamps round-off negativity to zero, rejects anything larger.
fn clamp_variance(v: f64, scale: f64) -> Result<f64> {
    if v >= 0.0 {
        Ok(v)
    } else if v >= -NEG_VARIANCE_TOL * scale.max(1.0) {
        Ok(0.0)
    } else {
        Err(Error::NegativeVariance(v))
    }
}

/// Precomputed GPQ weights for one point set and kernel.
///
/// The weights do not depend on `α`; only `σ̄²` scales with `α²`.
#[derive(Debug, Clone)]
pub struct GpqWeights {
    /// `K⁻¹q`
    pub w_mean: DVector<f64>,
    /// `K⁻¹QK⁻¹`
    pub w_cov: DMatrix<f64>,
    /// `R·K⁻¹`, D×N
    pub w_cross: DMatrix<f64>,
    pub sigma_bar_sq: f64,
    pub unit_points: DMatrix<f64>,
    pub kernel_params: RbfKernelParams,
    /// `K⁻¹B` with `BBᵀ = Q − qqᵀ − RᵀR`, so that
    /// `K⁻¹(Q − qqᵀ)K⁻¹ = FFᵀ + w_crossᵀ·w_cross`.
    cov_factor: DMatrix<f64>,
}

impl GpqWeights {
    pub fn dim(&self) -> usize {
        self.unit_points.nrows()
    }

    pub fn len(&self) -> usize {
        self.unit_points.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.unit_points.ncols() == 0
    }

    /// Moments in unit space from function values `y` (E×N).
    ///
    /// Returns `(μ̂, Σ̂, C_unit)` where `C_unit` is the D×E cross-covariance
    /// between `ξ` and `g`. `Σ̂` is assembled as `VVᵀ + C_unitᵀC_unit + σ̄²I`,
    /// which keeps it and the joint covariance positive semi-definite even
    /// when `K` is close to singular.
    pub fn moments_from_values(
        &self,
        y: &DMatrix<f64>,
    ) -> (DVector<f64>, DMatrix<f64>, DMatrix<f64>) {
        let out_mean = y * &self.w_mean;
        let cross = &self.w_cross * y.transpose();
        let v = y * &self.cov_factor;
        let mut out_cov = &v * v.transpose() + cross.transpose() * &cross;
        for i in 0..out_cov.nrows() {
            out_cov[(i, i)] += self.sigma_bar_sq;
        }
        linalg::symmetrize_in_place(&mut out_cov);
        (out_mean, out_cov, cross)
    }
}

struct UnitWeights {
    w_mean: DVector<f64>,
    w_cov: DMatrix<f64>,
    w_cross: DMatrix<f64>,
    cov_factor: DMatrix<f64>,
    sigma_bar_sq: f64,
}

fn unit_weights(
    chol: &Cholesky<f64, Dyn>,
    q: &DVector<f64>,
    big_q: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> UnitWeights {
    let kinv_q = chol.solve(big_q);
    let w_cov = linalg::symmetrize(&chol.solve(&kinv_q.transpose()));
    let w_cross = chol.solve(&r.transpose()).transpose();
    // residual covariance of k(ξ) after regressing on ξ; PSD in exact arithmetic
    let resid = linalg::symmetrize(&(big_q - q * q.transpose() - r.transpose() * r));
    let eig = resid.symmetric_eigen();
    let root = DVector::from_iterator(eig.eigenvalues.len(), eig.eigenvalues.iter().map(|l| l.max(0.0).sqrt()));
    let b = eig.eigenvectors * DMatrix::from_diagonal(&root);
    UnitWeights {
        w_mean: chol.solve(q),
        w_cov,
        w_cross,
        cov_factor: chol.solve(&b),
        sigma_bar_sq: 1.0 - kinv_q.trace(),
    }
}

pub fn gpq_weights(unit_points: &DMatrix<f64>, params: &RbfKernelParams) -> Result<GpqWeights> {
    let params = params.for_dim(unit_points.nrows())?;
    let unit = RbfKernelParams {
        alpha: 1.0,
        lengthscales: params.lengthscales.clone(),
    };
    let km = kernel_matrix(unit_points, &unit)?;
    let q = kernel_mean_vector(unit_points, &unit)?;
    let big_q = kernel_cov_matrix(unit_points, &unit)?;
    let r = kernel_cross_matrix(unit_points, &unit)?;

    let mut w = unit_weights(&km.chol, &q, &big_q, &r);
    if w.sigma_bar_sq < -NEG_VARIANCE_TOL && km.jitter_used == 0.0 {
        // K factored but is numerically singular: retry once with jitter
        let n = km.k.nrows();
        let chol = (&km.k + DMatrix::identity(n, n) * KERNEL_JITTER)
            .cholesky()
            .ok_or_else(|| Error::IllConditionedKernel("kernel matrix not positive definite after jitter".into()))?;
        w = unit_weights(&chol, &q, &big_q, &r);
    }
    let a2 = params.alpha * params.alpha;
    let sigma_unit = clamp_variance(w.sigma_bar_sq, 1.0)
        .map_err(|_| Error::NegativeVariance(a2 * w.sigma_bar_sq))?;

    Ok(GpqWeights {
        w_mean: w.w_mean,
        w_cov: w.w_cov,
        w_cross: w.w_cross,
        sigma_bar_sq: a2 * sigma_unit,
        unit_points: unit_points.clone(),
        kernel_params: params,
        cov_factor: w.cov_factor,
    })
}

/// GPQ moment transform bound to a fixed set of weights.
#[derive(Debug, Clone)]
pub struct GpqTransform {
    pub weights: GpqWeights,
    label: String,
}

impl GpqTransform {
    pub fn new(points: &UnitPointSet, params: &RbfKernelParams) -> Result<Self> {
        Ok(Self {
            weights: gpq_weights(&points.points, params)?,
            label: format!("GPQ-{}", points.rule),
        })
    }

    pub fn from_weights(weights: GpqWeights, label: impl Into<String>) -> Self {
        Self {
            weights,
            label: label.into(),
        }
    }
}

impl MomentTransform for GpqTransform {
    fn apply(&self, g: &dyn VectorFunction, input: &GaussianDensity) -> Result<MomentTransformResult> {
        gpq_transform(g, input, &self.weights)
    }

    fn name(&self) -> String {
        self.label.clone()
    }
}

pub fn gpq_transform(
    g: &dyn VectorFunction,
    input: &GaussianDensity,
    weights: &GpqWeights,
) -> Result<MomentTransformResult> {
    check_dims(g, input)?;
    let l = input.cholesky_factor()?;
    let x = map_with_factor(&input.mean, &l, &weights.unit_points)?;
    let y = evaluate_columns(g, &x)?;
    let (out_mean, out_cov, cross_unit) = weights.moments_from_values(&y);
    Ok(MomentTransformResult {
        out_mean,
        out_cov,
        cross_cov: l * cross_unit,
        extra: Diagnostics {
            sigma_bar_sq: Some(weights.sigma_bar_sq),
            evaluations: y,
        },
    })
}

/// Noiseless GP predictive mean and variance at `query`.
pub fn gp_posterior(
    points: &DMatrix<f64>,
    values: &DVector<f64>,
    params: &RbfKernelParams,
    query: &[f64],
) -> Result<(f64, f64)> {
    let params = params.for_dim(points.nrows())?;
    if values.len() != points.ncols() || query.len() != points.nrows() {
        return Err(Error::DimensionMismatch("values or query do not match the points".into()));
    }
    let km = kernel_matrix(points, &params)?;
    let kq = kernel_vector(points, query, &params);
    let mean = kq.dot(&km.solve_vec(values));
    let prior = rbf_kernel(query, query, &params);
    let var = prior - kq.dot(&km.solve_vec(&kq));
    Ok((mean, clamp_variance(var, prior)?))
}

/// Posterior variance of `∫ g(ξ) N(ξ | 0, I) dξ` under the GP prior.
///
/// Independent of the observed values for a noiseless GP.
pub fn integral_variance(points: &DMatrix<f64>, params: &RbfKernelParams) -> Result<f64> {
    let params = params.for_dim(points.nrows())?;
    let km = kernel_matrix(points, &params)?;
    let q = kernel_mean_vector(points, &params)?;
    let a2 = params.alpha * params.alpha;
    let prior: f64 = a2 * params.inv_sq().map(|il| (2.0 * il + 1.0).powf(-0.5)).product::<f64>();
    clamp_variance(prior - q.dot(&km.solve_vec(&q)), a2)
}
