//! Coordinate-transform and filtering benchmarks.
//!
//! All experiments draw from one master seed; per-run seeds come from
//! [`derive_seed`]. Filters being compared always see the same truth
//! trajectories and measurement sequences.

pub mod metrics;
pub mod models;
pub mod polar;
pub mod reentry;
pub mod ungm;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::Result;
use crate::filtering::{run_filter, StateSpaceModel};
use crate::gpq::{GpqTransform, RbfKernelParams};
use crate::sigma_points::Rule;
use crate::transform::{ClassicalTransform, GaussianDensity, MomentTransform};

pub use metrics::{bootstrap_ci, inclination, nll, rmse, skl, BootstrapEstimate};
pub use models::{derive_seed, polar2cartesian, ReentryConfig, Trajectory, UngmConfig};

/// Resamples used for every bootstrap band in the reports.
pub const BOOTSTRAP_RESAMPLES: usize = 1000;

/// A sigma-point filter: a rule plus, for GPQ filters, kernel parameters for
/// the dynamics and the measurement transforms.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterSpec {
    pub label: String,
    pub rule: Rule,
    pub kernel_dyn: Option<RbfKernelParams>,
    pub kernel_obs: Option<RbfKernelParams>,
}

impl FilterSpec {
    pub fn classical(label: impl Into<String>, rule: Rule) -> Self {
        Self {
            label: label.into(),
            rule,
            kernel_dyn: None,
            kernel_obs: None,
        }
    }

    pub fn gpq(
        label: impl Into<String>,
        rule: Rule,
        kernel_dyn: RbfKernelParams,
        kernel_obs: RbfKernelParams,
    ) -> Self {
        Self {
            label: label.into(),
            rule,
            kernel_dyn: Some(kernel_dyn),
            kernel_obs: Some(kernel_obs),
        }
    }

    pub fn is_gpq(&self) -> bool {
        self.kernel_dyn.is_some()
    }

    /// Transforms for the dynamics and the measurement model.
    pub fn transforms(
        &self,
        state_dim: usize,
    ) -> Result<(Box<dyn MomentTransform>, Box<dyn MomentTransform>)> {
        let points = self.rule.points(state_dim)?;
        match (&self.kernel_dyn, &self.kernel_obs) {
            (Some(kd), Some(ko)) => Ok((
                Box::new(GpqTransform::new(&points, kd)?),
                Box::new(GpqTransform::new(&points, ko)?),
            )),
            _ => Ok((
                Box::new(ClassicalTransform::new(points.clone())),
                Box::new(ClassicalTransform::new(points)),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub run: usize,
    pub filter: String,
    pub rmse: f64,
    pub nll: f64,
    pub nci: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepCurve {
    pub step: usize,
    pub time: f64,
    pub filter: String,
    pub component: String,
    pub rmse: f64,
    pub nu: f64,
}

/// Run-averaged criteria for one filter with ±2σ bootstrap bands.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsSummary {
    pub filter: String,
    pub rmse: BootstrapEstimate,
    pub nll: BootstrapEstimate,
    pub nci: BootstrapEstimate,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchmarkReport {
    /// Sorted by filter (in spec order), then run index.
    pub runs: Vec<RunMetrics>,
    pub summary: Vec<MetricsSummary>,
    pub curves: Vec<StepCurve>,
}

impl BenchmarkReport {
    pub fn summary_for(&self, filter: &str) -> Option<&MetricsSummary> {
        self.summary.iter().find(|s| s.filter == filter)
    }

    pub fn curve(&self, filter: &str, component: &str) -> Vec<&StepCurve> {
        self.curves
            .iter()
            .filter(|c| c.filter == filter && c.component == component)
            .collect()
    }
}

/// Inputs shared by the filtering benchmarks.
pub(crate) struct Harness<'a> {
    pub model: &'a StateSpaceModel,
    pub truth: &'a [Trajectory],
    pub dt: f64,
    /// Named state components for per-step curves; `None` is the full state.
    pub components: &'a [(&'a str, Option<usize>)],
    pub seed: u64,
}

impl Harness<'_> {
    pub fn run(&self, specs: &[FilterSpec]) -> Result<BenchmarkReport> {
        let mut report = BenchmarkReport::default();
        let truth_states: Vec<Vec<DVector<f64>>> =
            self.truth.iter().map(|t| t.states.clone()).collect();
        for (fi, spec) in specs.iter().enumerate() {
            let (tf, th) = spec.transforms(self.model.state_dim)?;
            let estimates: Vec<Vec<GaussianDensity>> = self
                .truth
                .par_iter()
                .map(|t| run_filter(self.model, tf.as_ref(), th.as_ref(), &t.measurements).map(|r| r.filtered))
                .collect::<Result<_>>()?;

            let nci = metrics::inclination_per_run(&truth_states, &estimates)?;
            let mut rmses = Vec::with_capacity(estimates.len());
            let mut nlls = Vec::with_capacity(estimates.len());
            for (run, (x, est)) in truth_states.iter().zip(&estimates).enumerate() {
                let means: Vec<DVector<f64>> = est.iter().map(|g| g.mean.clone()).collect();
                let r = rmse(x, &means)?;
                let n = nll(x, est)?;
                rmses.push(r);
                nlls.push(n);
                report.runs.push(RunMetrics {
                    run,
                    filter: spec.label.clone(),
                    rmse: r,
                    nll: n,
                    nci: nci[run],
                });
            }
            let boot = |vals: &[f64], which: u64| {
                bootstrap_ci(
                    vals,
                    BOOTSTRAP_RESAMPLES,
                    derive_seed(self.seed, models::streams::BOOTSTRAP, 3 * fi as u64 + which),
                )
            };
            report.summary.push(MetricsSummary {
                filter: spec.label.clone(),
                rmse: boot(&rmses, 0)?,
                nll: boot(&nlls, 1)?,
                nci: boot(&nci, 2)?,
            });
            for (name, component) in self.components {
                let (r, nu) = metrics::step_curves(&truth_states, &estimates, *component)?;
                for (k, (r, nu)) in r.into_iter().zip(nu).enumerate() {
                    report.curves.push(StepCurve {
                        step: k + 1,
                        time: (k + 1) as f64 * self.dt,
                        filter: spec.label.clone(),
                        component: name.to_string(),
                        rmse: r,
                        nu,
                    });
                }
            }
        }
        Ok(report)
    }
}
