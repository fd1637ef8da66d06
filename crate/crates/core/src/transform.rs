//! Gaussian densities, vector functions and classical weighted-sum moment
//! transforms.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg;
use crate::sigma_points::UnitPointSet;

const SYMMETRY_TOL: f64 = 1e-10;
const COV_JITTER_SCALE: f64 = 1e-12;

/// Mean vector and covariance matrix of a Gaussian random vector.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianDensity {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl GaussianDensity {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if d == 0 {
            return Err(Error::InvalidParameter("empty mean vector".into()));
        }
        if cov.nrows() != d || cov.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "mean has length {d} but covariance is {}x{}",
                cov.nrows(),
                cov.ncols()
            )));
        }
        if mean.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite mean or covariance".into()));
        }
        if linalg::asymmetry(&cov) > SYMMETRY_TOL {
            return Err(Error::InvalidParameter("covariance is not symmetric".into()));
        }
        Ok(Self { mean, cov })
    }

    pub fn from_slices(mean: &[f64], cov_row_major: &[f64]) -> Result<Self> {
        let d = mean.len();
        if cov_row_major.len() != d * d {
            return Err(Error::DimensionMismatch(format!(
                "covariance needs {} entries, got {}",
                d * d,
                cov_row_major.len()
            )));
        }
        Self::new(
            DVector::from_column_slice(mean),
            DMatrix::from_row_slice(d, d, cov_row_major),
        )
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Lower Cholesky factor `L` with `P = L·Lᵀ`.
    ///
    /// A single retry adds `1e-12·trace(P)/D·I`; a second failure is an error.
    pub fn cholesky_factor(&self) -> Result<DMatrix<f64>> {
        let jitter = COV_JITTER_SCALE * self.cov.trace() / self.dim() as f64;
        linalg::cholesky_with_jitter(&self.cov, jitter)
            .map(|f| f.chol.l())
            .ok_or(Error::SingularCovariance)
    }
}

/// A map `g: R^D → R^E`.
///
/// Implementations must return vectors of length `output_dim()` for every input.
pub trait VectorFunction: Sync {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn eval(&self, x: &DVector<f64>) -> DVector<f64>;
}

/// Adapter turning a closure into a [`VectorFunction`].
pub struct FnMap<F> {
    input_dim: usize,
    output_dim: usize,
    f: F,
}

impl<F> FnMap<F>
where
    F: Fn(&DVector<f64>) -> DVector<f64> + Sync,
{
    pub fn new(input_dim: usize, output_dim: usize, f: F) -> Self {
        Self {
            input_dim,
            output_dim,
            f,
        }
    }
}

impl<F> VectorFunction for FnMap<F>
where
    F: Fn(&DVector<f64>) -> DVector<f64> + Sync,
{
    fn input_dim(&self) -> usize {
        self.input_dim
    }

    fn output_dim(&self) -> usize {
        self.output_dim
    }

    fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.f)(x)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics {
    /// Expected GP variance added to the output covariance (GPQ only).
    pub sigma_bar_sq: Option<f64>,
    /// E×N function values at the sigma-points (empty for Monte Carlo).
    pub evaluations: DMatrix<f64>,
}

/// Joint Gaussian approximation of `(x, g(x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTransformResult {
    pub out_mean: DVector<f64>,
    pub out_cov: DMatrix<f64>,
    /// D×E input–output cross-covariance.
    pub cross_cov: DMatrix<f64>,
    pub extra: Diagnostics,
}

impl MomentTransformResult {
    pub fn output_density(&self) -> Result<GaussianDensity> {
        GaussianDensity::new(self.out_mean.clone(), self.out_cov.clone())
    }

    /// `[[P, C], [Cᵀ, Σ']]`.
    pub fn joint_cov(&self, input_cov: &DMatrix<f64>) -> DMatrix<f64> {
        let d = input_cov.nrows();
        let e = self.out_cov.nrows();
        let mut joint = DMatrix::zeros(d + e, d + e);
        joint.view_mut((0, 0), (d, d)).copy_from(input_cov);
        joint.view_mut((0, d), (d, e)).copy_from(&self.cross_cov);
        joint
            .view_mut((d, 0), (e, d))
            .copy_from(&self.cross_cov.transpose());
        joint.view_mut((d, d), (e, e)).copy_from(&self.out_cov);
        joint
    }
}

/// Anything that maps input Gaussian moments through a function.
pub trait MomentTransform: Sync {
    fn apply(&self, g: &dyn VectorFunction, input: &GaussianDensity) -> Result<MomentTransformResult>;

    fn name(&self) -> String;
}

pub(crate) fn check_dims(g: &dyn VectorFunction, input: &GaussianDensity) -> Result<()> {
    if g.input_dim() != input.dim() {
        return Err(Error::DimensionMismatch(format!(
            "function expects input dimension {}, density has {}",
            g.input_dim(),
            input.dim()
        )));
    }
    Ok(())
}

/// Sigma-points `xᵢ = m + L·ξᵢ`, one per column.
pub fn affine_map_points(input: &GaussianDensity, unit_points: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let l = input.cholesky_factor()?;
    map_with_factor(&input.mean, &l, unit_points)
}

pub(crate) fn map_with_factor(
    mean: &DVector<f64>,
    l: &DMatrix<f64>,
    unit_points: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    if unit_points.nrows() != mean.len() {
        return Err(Error::DimensionMismatch(format!(
            "unit points have dimension {}, density has {}",
            unit_points.nrows(),
            mean.len()
        )));
    }
    let mut x = l * unit_points;
    for mut col in x.column_iter_mut() {
        col += mean;
    }
    Ok(x)
}

/// Evaluates `g` on every column; returns an E×N matrix.
pub fn evaluate_columns(g: &dyn VectorFunction, points: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let e = g.output_dim();
    let mut y = DMatrix::zeros(e, points.ncols());
    for (i, col) in points.column_iter().enumerate() {
        let v = g.eval(&col.into_owned());
        if v.len() != e {
            return Err(Error::DimensionMismatch(format!(
                "function returned {} values, expected {e}",
                v.len()
            )));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteEvaluation { index: i });
        }
        y.set_column(i, &v);
    }
    Ok(y)
}

/// Weighted-sum transform with a fixed classical rule.
#[derive(Debug, Clone)]
pub struct ClassicalTransform {
    pub rule: UnitPointSet,
}

impl ClassicalTransform {
    pub fn new(rule: UnitPointSet) -> Self {
        Self { rule }
    }
}

impl MomentTransform for ClassicalTransform {
    fn apply(&self, g: &dyn VectorFunction, input: &GaussianDensity) -> Result<MomentTransformResult> {
        classical_transform(g, input, &self.rule)
    }

    fn name(&self) -> String {
        self.rule.rule.to_string()
    }
}

pub fn classical_transform(
    g: &dyn VectorFunction,
    input: &GaussianDensity,
    rule: &UnitPointSet,
) -> Result<MomentTransformResult> {
    check_dims(g, input)?;
    let x = affine_map_points(input, &rule.points)?;
    let y = evaluate_columns(g, &x)?;

    let out_mean = &y * &rule.mean_weights;
    let mut dy = y.clone();
    for mut col in dy.column_iter_mut() {
        col -= &out_mean;
    }
    let mut dx = x;
    for mut col in dx.column_iter_mut() {
        col -= &input.mean;
    }
    let mut dy_w = dy.clone();
    for (mut col, w) in dy_w.column_iter_mut().zip(rule.cov_weights.iter()) {
        col *= *w;
    }
    let mut out_cov = &dy_w * dy.transpose();
    linalg::symmetrize_in_place(&mut out_cov);
    let cross_cov = dx * dy_w.transpose();

    Ok(MomentTransformResult {
        out_mean,
        out_cov,
        cross_cov,
        extra: Diagnostics {
            sigma_bar_sq: None,
            evaluations: y,
        },
    })
}

/// Sample-moment transform; the ground-truth reference for the benchmarks.
#[derive(Debug, Clone, Copy)]
pub struct MonteCarloTransform {
    pub n_samples: usize,
    pub seed: u64,
}

impl MomentTransform for MonteCarloTransform {
    fn apply(&self, g: &dyn VectorFunction, input: &GaussianDensity) -> Result<MomentTransformResult> {
        mc_transform(g, input, self.n_samples, self.seed)
    }

    fn name(&self) -> String {
        format!("MC-{}", self.n_samples)
    }
}

pub fn mc_transform(
    g: &dyn VectorFunction,
    input: &GaussianDensity,
    n_samples: usize,
    seed: u64,
) -> Result<MomentTransformResult> {
    if n_samples < 2 {
        return Err(Error::InvalidParameter("Monte Carlo needs at least 2 samples".into()));
    }
    check_dims(g, input)?;
    let d = input.dim();
    let e = g.output_dim();
    let l = input.cholesky_factor()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut xs = DMatrix::zeros(d, n_samples);
    let mut ys = DMatrix::zeros(e, n_samples);
    let mut xi = DVector::zeros(d);
    for s in 0..n_samples {
        for v in xi.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
        let x = &input.mean + &l * &xi;
        let y = g.eval(&x);
        if y.len() != e {
            return Err(Error::DimensionMismatch(format!(
                "function returned {} values, expected {e}",
                y.len()
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteEvaluation { index: s });
        }
        xs.set_column(s, &x);
        ys.set_column(s, &y);
    }

    let n = n_samples as f64;
    let x_mean = xs.column_sum() / n;
    let out_mean = ys.column_sum() / n;
    for mut col in xs.column_iter_mut() {
        col -= &x_mean;
    }
    for mut col in ys.column_iter_mut() {
        col -= &out_mean;
    }
    let mut out_cov = &ys * ys.transpose() / (n - 1.0);
    linalg::symmetrize_in_place(&mut out_cov);
    let cross_cov = &xs * ys.transpose() / (n - 1.0);

    Ok(MomentTransformResult {
        out_mean,
        out_cov,
        cross_cov,
        extra: Diagnostics::default(),
    })
}
