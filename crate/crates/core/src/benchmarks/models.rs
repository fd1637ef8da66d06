//! Benchmark nonlinearities and truth simulators.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::transform::GaussianDensity;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for item `index` of stream `stream` under a master seed.
///
/// `mix(mix(master ^ mix(stream)) ^ index)`; streams separate independent
/// uses (truth simulation, Monte Carlo references, bootstrap) of one master.
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    mix(mix(master ^ mix(stream)) ^ index)
}

pub mod streams {
    pub const TRUTH: u64 = 1;
    pub const MONTE_CARLO: u64 = 2;
    pub const BOOTSTRAP: u64 = 3;
}

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn sample_gaussian(rng: &mut ChaCha8Rng, g: &GaussianDensity) -> Result<DVector<f64>> {
    let l = g.cholesky_factor()?;
    let xi = DVector::from_fn(g.dim(), |_, _| StandardNormal.sample(rng));
    Ok(&g.mean + l * xi)
}

pub(crate) fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Truth states `x_1..x_K` and measurements `z_1..z_K` of one simulated run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub initial: DVector<f64>,
    pub states: Vec<DVector<f64>>,
    pub measurements: Vec<DVector<f64>>,
}

pub fn polar2cartesian(x: &DVector<f64>) -> DVector<f64> {
    DVector::from_vec(vec![x[0] * x[1].cos(), x[0] * x[1].sin()])
}

// ---------------------------------------------------------------------------
// UNGM

pub fn ungm_dynamics(x: f64, k: usize) -> f64 {
    0.5 * x + 25.0 * x / (1.0 + x * x) + 8.0 * (1.2 * k as f64).cos()
}

pub fn ungm_observation(x: f64) -> f64 {
    x * x / 20.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct UngmConfig {
    pub steps: usize,
    pub n_runs: usize,
    pub process_noise_var: f64,
    pub meas_noise_var: f64,
    pub init_mean: f64,
    pub init_var: f64,
    /// Measure `x_{k−1}` (as the model is commonly printed) rather than `x_k`.
    pub observe_previous_state: bool,
    pub seed: u64,
}

impl Default for UngmConfig {
    fn default() -> Self {
        Self {
            steps: 500,
            n_runs: 25,
            process_noise_var: 10.0,
            meas_noise_var: 1.0,
            init_mean: 0.0,
            init_var: 5.0,
            observe_previous_state: true,
            seed: 0,
        }
    }
}

impl UngmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.process_noise_var > 0.0 && self.meas_noise_var > 0.0 && self.init_var > 0.0) {
            return Err(Error::InvalidParameter("UNGM variances must be positive".into()));
        }
        if self.steps == 0 || self.n_runs == 0 {
            return Err(Error::InvalidParameter("UNGM needs at least one step and one run".into()));
        }
        Ok(())
    }
}

/// One UNGM run from the initial state `x0`.
pub fn ungm_run(config: &UngmConfig, x0: f64, rng: &mut ChaCha8Rng) -> Trajectory {
    let q_sd = config.process_noise_var.sqrt();
    let r_sd = config.meas_noise_var.sqrt();
    let mut states = Vec::with_capacity(config.steps);
    let mut measurements = Vec::with_capacity(config.steps);
    let mut prev = x0;
    for k in 1..=config.steps {
        let x = ungm_dynamics(prev, k) + q_sd * normal(rng);
        let observed = if config.observe_previous_state { prev } else { x };
        let z = ungm_observation(observed) + r_sd * normal(rng);
        states.push(DVector::from_element(1, x));
        measurements.push(DVector::from_element(1, z));
        prev = x;
    }
    Trajectory {
        initial: DVector::from_element(1, x0),
        states,
        measurements,
    }
}

pub fn ungm_simulate(config: &UngmConfig) -> Result<Vec<Trajectory>> {
    config.validate()?;
    Ok((0..config.n_runs)
        .map(|run| {
            let mut rng = rng(derive_seed(config.seed, streams::TRUTH, run as u64));
            let x0 = config.init_mean + config.init_var.sqrt() * normal(&mut rng);
            ungm_run(config, x0, &mut rng)
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Ballistic reentry

#[derive(Debug, Clone, PartialEq)]
pub struct ReentryConfig {
    pub gamma: f64,
    /// Radar position `(s_x, s_y)` in km.
    pub radar: (f64, f64),
    pub meas_noise_var: f64,
    pub dt: f64,
    pub duration: f64,
    pub truth_init_mean: [f64; 3],
    pub truth_init_var: [f64; 3],
    pub filter_init_mean: [f64; 3],
    pub filter_init_var: [f64; 3],
    /// Diagonal of the discrete process-noise covariance used by the filters.
    pub process_noise_var: [f64; 3],
    pub n_runs: usize,
    pub seed: u64,
}

impl Default for ReentryConfig {
    fn default() -> Self {
        Self {
            gamma: 0.164,
            radar: (30.0, 30.0),
            meas_noise_var: 9.2903e-4,
            dt: 0.1,
            duration: 30.0,
            truth_init_mean: [90.0, 6.0, 1.5],
            truth_init_var: [0.0929, 1.4865, 1e-4],
            filter_init_mean: [90.0, 6.0, 1.7],
            filter_init_var: [0.0929, 1.4865, 10.0],
            process_noise_var: [1e-10, 1e-10, 1e-8],
            n_runs: 20,
            seed: 0,
        }
    }
}

impl ReentryConfig {
    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.duration > 0.0) {
            return Err(Error::InvalidParameter("dt and duration must be positive".into()));
        }
        let ratio = self.duration / self.dt;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::InvalidParameter("duration must be a multiple of dt".into()));
        }
        if !(self.meas_noise_var > 0.0) || self.n_runs == 0 {
            return Err(Error::InvalidParameter(
                "measurement variance must be positive and at least one run requested".into(),
            ));
        }
        let vars = self
            .truth_init_var
            .iter()
            .chain(&self.filter_init_var);
        if vars.clone().any(|v| !(*v > 0.0)) || self.process_noise_var.iter().any(|v| *v < 0.0) {
            return Err(Error::InvalidParameter("reentry variances must be positive".into()));
        }
        Ok(())
    }

    pub fn filter_initial(&self) -> GaussianDensity {
        GaussianDensity::new(
            DVector::from_column_slice(&self.filter_init_mean),
            DMatrix::from_diagonal(&DVector::from_column_slice(&self.filter_init_var)),
        )
        .expect("diagonal covariance is valid")
    }

    fn truth_initial(&self) -> GaussianDensity {
        GaussianDensity::new(
            DVector::from_column_slice(&self.truth_init_mean),
            DMatrix::from_diagonal(&DVector::from_column_slice(&self.truth_init_var)),
        )
        .expect("diagonal covariance is valid")
    }
}

/// Continuous drift `(ṗ, v̇, θ̇) = (−v, −v²θe^{−γp}, 0)`.
pub fn reentry_drift(x: &DVector<f64>, gamma: f64) -> DVector<f64> {
    let (p, v, theta) = (x[0], x[1], x[2]);
    DVector::from_vec(vec![-v, -v * v * theta * (-gamma * p).exp(), 0.0])
}

pub fn reentry_rk4_step(x: &DVector<f64>, dt: f64, gamma: f64) -> DVector<f64> {
    let k1 = reentry_drift(x, gamma);
    let k2 = reentry_drift(&(x + &k1 * (0.5 * dt)), gamma);
    let k3 = reentry_drift(&(x + &k2 * (0.5 * dt)), gamma);
    let k4 = reentry_drift(&(x + &k3 * dt), gamma);
    x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

/// Euler-discretized dynamics used by the filters.
pub fn reentry_discrete_dynamics(x: &DVector<f64>, dt: f64, gamma: f64, noise: &DVector<f64>) -> DVector<f64> {
    let (p, v, theta) = (x[0], x[1], x[2]);
    DVector::from_vec(vec![
        p - dt * v + noise[0],
        v - dt * v * v * theta * (-gamma * p).exp() + noise[1],
        theta + noise[2],
    ])
}

/// Noiseless radar range to an object at altitude `p`.
pub fn reentry_range(x: &DVector<f64>, radar: (f64, f64)) -> f64 {
    let (sx, sy) = radar;
    (sx * sx + (sy - x[0]) * (sy - x[0])).sqrt()
}

pub fn reentry_simulate_truth(config: &ReentryConfig) -> Result<Vec<Trajectory>> {
    config.validate()?;
    let init = config.truth_initial();
    let r_sd = config.meas_noise_var.sqrt();
    (0..config.n_runs)
        .map(|run| {
            let mut rng = rng(derive_seed(config.seed, streams::TRUTH, run as u64));
            let x0 = sample_gaussian(&mut rng, &init)?;
            let mut states = Vec::with_capacity(config.steps());
            let mut measurements = Vec::with_capacity(config.steps());
            let mut x = x0.clone();
            for _ in 0..config.steps() {
                x = reentry_rk4_step(&x, config.dt, config.gamma);
                let y = reentry_range(&x, config.radar) + r_sd * normal(&mut rng);
                states.push(x.clone());
                measurements.push(DVector::from_element(1, y));
            }
            Ok(Trajectory {
                initial: x0,
                states,
                measurements,
            })
        })
        .collect()
}
