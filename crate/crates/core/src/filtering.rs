//! Generic Gaussian filter with additive noise, parameterized by moment transforms.
//!
//! Prediction pushes the posterior through the dynamics with one transform and
//! adds the process noise; the update pushes the prediction through the
//! measurement model with a second transform and applies the Kalman-style
//! conditioning of the joint Gaussian.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::transform::{FnMap, GaussianDensity, MomentTransform};

/// Time-indexed dynamics `x_k = f(x_{k−1}, k)`.
pub type DynamicsFn = dyn Fn(&DVector<f64>, usize) -> DVector<f64> + Send + Sync;
pub type ObservationFn = dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync;

const INNOVATION_JITTER_SCALE: f64 = 1e-12;

pub struct StateSpaceModel {
    pub state_dim: usize,
    pub obs_dim: usize,
    pub dynamics: Box<DynamicsFn>,
    pub observation: Box<ObservationFn>,
    pub process_noise_cov: DMatrix<f64>,
    pub measurement_noise_cov: DMatrix<f64>,
    pub initial: GaussianDensity,
}

fn check_noise(name: &str, cov: &DMatrix<f64>, dim: usize) -> Result<()> {
    if cov.nrows() != dim || cov.ncols() != dim {
        return Err(Error::DimensionMismatch(format!(
            "{name} covariance is {}x{}, expected {dim}x{dim}",
            cov.nrows(),
            cov.ncols()
        )));
    }
    if linalg::asymmetry(cov) > 1e-10 || !linalg::is_psd(cov, 1e-9) {
        return Err(Error::InvalidParameter(format!(
            "{name} covariance must be symmetric positive semi-definite"
        )));
    }
    Ok(())
}

impl StateSpaceModel {
    pub fn new(
        dynamics: Box<DynamicsFn>,
        observation: Box<ObservationFn>,
        process_noise_cov: DMatrix<f64>,
        measurement_noise_cov: DMatrix<f64>,
        initial: GaussianDensity,
    ) -> Result<Self> {
        let state_dim = initial.dim();
        let obs_dim = measurement_noise_cov.nrows();
        check_noise("process noise", &process_noise_cov, state_dim)?;
        check_noise("measurement noise", &measurement_noise_cov, obs_dim)?;
        Ok(Self {
            state_dim,
            obs_dim,
            dynamics,
            observation,
            process_noise_cov,
            measurement_noise_cov,
            initial,
        })
    }
}

/// Predicted measurement moments of one update.
#[derive(Debug, Clone, PartialEq)]
pub struct Innovation {
    pub predicted_measurement: DVector<f64>,
    /// `S = S₀ + R`
    pub cov: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpdateResult {
    pub posterior: GaussianDensity,
    pub innovation: Innovation,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FilterRun {
    /// `m_{k|k−1}, P_{k|k−1}` for k = 1..K
    pub predicted: Vec<GaussianDensity>,
    /// `m_{k|k}, P_{k|k}` for k = 1..K
    pub filtered: Vec<GaussianDensity>,
    pub innovations: Vec<Innovation>,
}

impl FilterRun {
    pub fn len(&self) -> usize {
        self.filtered.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filtered.is_empty()
    }
}

pub fn predict(
    transform: &dyn MomentTransform,
    posterior: &GaussianDensity,
    dynamics: &DynamicsFn,
    process_noise_cov: &DMatrix<f64>,
    k: usize,
) -> Result<GaussianDensity> {
    let dim = posterior.dim();
    let f = FnMap::new(dim, dim, |x: &DVector<f64>| dynamics(x, k));
    let r = transform.apply(&f, posterior).map_err(|e| e.at_step(k))?;
    let mut cov = r.out_cov + process_noise_cov;
    linalg::symmetrize_in_place(&mut cov);
    GaussianDensity::new(r.out_mean, cov).map_err(|e| e.at_step(k))
}

pub fn update(
    transform: &dyn MomentTransform,
    prior: &GaussianDensity,
    observation: &ObservationFn,
    measurement_noise_cov: &DMatrix<f64>,
    z: &DVector<f64>,
) -> Result<UpdateResult> {
    let e = measurement_noise_cov.nrows();
    if z.len() != e {
        return Err(Error::DimensionMismatch(format!(
            "measurement has length {}, expected {e}",
            z.len()
        )));
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite measurement".into()));
    }
    let h = FnMap::new(prior.dim(), e, observation);
    let r = transform.apply(&h, prior)?;

    let mut s = r.out_cov + measurement_noise_cov;
    linalg::symmetrize_in_place(&mut s);
    let jitter = INNOVATION_JITTER_SCALE * s.trace().abs() / e as f64;
    let chol = linalg::cholesky_with_jitter(&s, jitter).ok_or(Error::SingularInnovation)?;

    // G = C·S⁻¹, computed as (S⁻¹Cᵀ)ᵀ
    let gain = chol.chol.solve(&r.cross_cov.transpose()).transpose();
    let mean = &prior.mean + &gain * (z - &r.out_mean);
    let mut cov = &prior.cov - &gain * &s * gain.transpose();
    linalg::symmetrize_in_place(&mut cov);

    Ok(UpdateResult {
        posterior: GaussianDensity::new(mean, cov)?,
        innovation: Innovation {
            predicted_measurement: r.out_mean,
            cov: s,
        },
    })
}

/// Runs predict/update from `model.initial` over all measurements `z_1..z_K`.
pub fn run_filter(
    model: &StateSpaceModel,
    transform_dyn: &dyn MomentTransform,
    transform_obs: &dyn MomentTransform,
    measurements: &[DVector<f64>],
) -> Result<FilterRun> {
    if measurements.is_empty() {
        return Err(Error::InvalidParameter("measurement sequence is empty".into()));
    }
    let mut run = FilterRun {
        predicted: Vec::with_capacity(measurements.len()),
        filtered: Vec::with_capacity(measurements.len()),
        innovations: Vec::with_capacity(measurements.len()),
    };
    let mut posterior = model.initial.clone();
    for (i, z) in measurements.iter().enumerate() {
        let k = i + 1;
        let prior = predict(
            transform_dyn,
            &posterior,
            model.dynamics.as_ref(),
            &model.process_noise_cov,
            k,
        )?;
        let upd = update(
            transform_obs,
            &prior,
            model.observation.as_ref(),
            &model.measurement_noise_cov,
            z,
        )
        .map_err(|e| e.at_step(k))?;
        posterior = upd.posterior.clone();
        run.predicted.push(prior);
        run.filtered.push(upd.posterior);
        run.innovations.push(upd.innovation);
    }
    Ok(run)
}
