//! Estimation-quality metrics and bootstrap bands.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::transform::GaussianDensity;

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a == 0 || a != b {
        return Err(Error::DimensionMismatch(format!(
            "sequences must be non-empty and of equal length ({a} vs {b})"
        )));
    }
    Ok(())
}

/// `√(1/K Σ ‖x_k − m_k‖²)`
pub fn rmse(truth: &[DVector<f64>], means: &[DVector<f64>]) -> Result<f64> {
    check_lengths(truth.len(), means.len())?;
    let sum: f64 = truth
        .iter()
        .zip(means)
        .map(|(x, m)| (x - m).norm_squared())
        .sum();
    Ok((sum / truth.len() as f64).sqrt())
}

fn gaussian_nll(x: &DVector<f64>, est: &GaussianDensity) -> Result<f64> {
    let d = x.len();
    let chol = est.cov.clone().cholesky().ok_or(Error::SingularCovariance)?;
    let e = x - &est.mean;
    let maha = e.dot(&chol.solve(&e));
    let log_det = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    Ok(0.5 * (d as f64 * (2.0 * std::f64::consts::PI).ln() + log_det + maha))
}

/// Time-averaged `½[log|2πP| + (x − m)ᵀP⁻¹(x − m)]`.
pub fn nll(truth: &[DVector<f64>], estimates: &[GaussianDensity]) -> Result<f64> {
    check_lengths(truth.len(), estimates.len())?;
    let mut sum = 0.0;
    for (x, est) in truth.iter().zip(estimates) {
        sum += gaussian_nll(x, est)?;
    }
    Ok(sum / truth.len() as f64)
}

/// Symmetrized KL divergence between two Gaussians of equal dimension.
pub fn skl(a: &GaussianDensity, b: &GaussianDensity) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "densities of dimension {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    let ca = a.cov.clone().cholesky().ok_or(Error::SingularCovariance)?;
    let cb = b.cov.clone().cholesky().ok_or(Error::SingularCovariance)?;
    let dm = &a.mean - &b.mean;
    let quad = dm.dot(&ca.solve(&dm)) + dm.dot(&cb.solve(&dm));
    let traces = ca.solve(&b.cov).trace() + cb.solve(&a.cov).trace();
    Ok(0.25 * (quad + traces - 2.0 * a.dim() as f64))
}

/// Squared-error matrices `Σ_k = 1/M Σ_runs e eᵀ` across runs.
fn mse_matrices(errors: &[Vec<DVector<f64>>]) -> Vec<DMatrix<f64>> {
    let runs = errors.len() as f64;
    let steps = errors[0].len();
    (0..steps)
        .map(|k| {
            let d = errors[0][k].len();
            let mut acc = DMatrix::zeros(d, d);
            for run in errors {
                acc += &run[k] * run[k].transpose();
            }
            acc / runs
        })
        .collect()
}

fn errors(truth: &[Vec<DVector<f64>>], est: &[Vec<GaussianDensity>]) -> Result<Vec<Vec<DVector<f64>>>> {
    if truth.len() < 2 || truth.len() != est.len() {
        return Err(Error::DegenerateEnsemble(format!(
            "need at least two paired runs, got {} truth and {} estimate runs",
            truth.len(),
            est.len()
        )));
    }
    let steps = truth[0].len();
    truth
        .iter()
        .zip(est)
        .map(|(t, e)| {
            check_lengths(t.len(), e.len())?;
            if t.len() != steps {
                return Err(Error::DimensionMismatch("runs have different lengths".into()));
            }
            Ok(t.iter().zip(e).map(|(x, g)| x - &g.mean).collect())
        })
        .collect()
}

/// `log₁₀(eᵀP⁻¹e / eᵀΣ⁻¹e)`, taken as 0 when the error vanishes.
fn log_ratio(e: &DVector<f64>, p: &DMatrix<f64>, sigma: &DMatrix<f64>, step: usize) -> Result<f64> {
    if e.norm_squared() == 0.0 {
        return Ok(0.0);
    }
    let cp = p.clone().cholesky().ok_or(Error::SingularCovariance)?;
    let cs = sigma.clone().cholesky().ok_or_else(|| {
        Error::DegenerateEnsemble(format!("sample error matrix singular at step {step}"))
    })?;
    Ok((e.dot(&cp.solve(e)) / e.dot(&cs.solve(e))).log10())
}

fn select(e: &DVector<f64>, p: &DMatrix<f64>, s: &DMatrix<f64>, c: Option<usize>) -> (DVector<f64>, DMatrix<f64>, DMatrix<f64>) {
    match c {
        None => (e.clone(), p.clone(), s.clone()),
        Some(d) => (
            DVector::from_element(1, e[d]),
            DMatrix::from_element(1, 1, p[(d, d)]),
            DMatrix::from_element(1, 1, s[(d, d)]),
        ),
    }
}

/// Per-run inclination indicator `ν = 10/K Σ_k log₁₀(eᵀP⁻¹e / eᵀΣ_k⁻¹e)`.
///
/// `Σ_k` is the sample mean-square-error matrix across all runs at step k,
/// so the value for one run depends on the whole ensemble.
pub fn inclination_per_run(
    truth: &[Vec<DVector<f64>>],
    estimates: &[Vec<GaussianDensity>],
) -> Result<Vec<f64>> {
    let errs = errors(truth, estimates)?;
    let sigmas = mse_matrices(&errs);
    let steps = sigmas.len() as f64;
    errs.iter()
        .zip(estimates)
        .map(|(run_err, run_est)| {
            let mut acc = 0.0;
            for (k, (e, est)) in run_err.iter().zip(run_est).enumerate() {
                acc += log_ratio(e, &est.cov, &sigmas[k], k + 1)?;
            }
            Ok(10.0 * acc / steps)
        })
        .collect()
}

/// Inclination indicator averaged over runs.
pub fn inclination(truth: &[Vec<DVector<f64>>], estimates: &[Vec<GaussianDensity>]) -> Result<f64> {
    let per_run = inclination_per_run(truth, estimates)?;
    Ok(per_run.iter().sum::<f64>() / per_run.len() as f64)
}

/// Per-step RMSE and inclination across runs.
///
/// `component = None` uses the full state; `Some(d)` restricts both metrics
/// to state component `d`.
pub fn step_curves(
    truth: &[Vec<DVector<f64>>],
    estimates: &[Vec<GaussianDensity>],
    component: Option<usize>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let errs = errors(truth, estimates)?;
    let sigmas = mse_matrices(&errs);
    let runs = errs.len() as f64;
    let mut rmse_k = Vec::with_capacity(sigmas.len());
    let mut nu_k = Vec::with_capacity(sigmas.len());
    for (k, sigma) in sigmas.iter().enumerate() {
        let mut sq = 0.0;
        let mut lr = 0.0;
        for (run_err, run_est) in errs.iter().zip(estimates) {
            let (e, p, s) = select(&run_err[k], &run_est[k].cov, sigma, component);
            sq += e.norm_squared();
            lr += log_ratio(&e, &p, &s, k + 1)?;
        }
        rmse_k.push((sq / runs).sqrt());
        nu_k.push(10.0 * lr / runs);
    }
    Ok((rmse_k, nu_k))
}

/// Mean with a ±2σ bootstrap band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapEstimate {
    pub mean: f64,
    /// Two standard deviations of the resampled means.
    pub band: f64,
}

impl BootstrapEstimate {
    pub fn lower(&self) -> f64 {
        self.mean - self.band
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.band
    }
}

pub fn bootstrap_ci(values: &[f64], n_resamples: usize, seed: u64) -> Result<BootstrapEstimate> {
    if values.len() < 2 {
        return Err(Error::InvalidParameter("bootstrap needs at least two values".into()));
    }
    if n_resamples < 2 {
        return Err(Error::InvalidParameter("bootstrap needs at least two resamples".into()));
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let means: Vec<f64> = (0..n_resamples)
        .map(|_| (0..n).map(|_| values[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    let mm = means.iter().sum::<f64>() / n_resamples as f64;
    let var = means.iter().map(|m| (m - mm) * (m - mm)).sum::<f64>() / (n_resamples - 1) as f64;
    Ok(BootstrapEstimate {
        mean,
        band: 2.0 * var.sqrt(),
    })
}
