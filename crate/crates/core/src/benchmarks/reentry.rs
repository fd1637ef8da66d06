//! Ballistic reentry tracking with a single range radar.

use nalgebra::{DMatrix, DVector};

use super::models::{reentry_discrete_dynamics, reentry_range, reentry_simulate_truth};
use super::{BenchmarkReport, FilterSpec, Harness, ReentryConfig};
use crate::error::Result;
use crate::filtering::StateSpaceModel;
use crate::gpq::RbfKernelParams;
use crate::sigma_points::Rule;

pub const COMPONENTS: [(&str, Option<usize>); 4] = [
    ("position", Some(0)),
    ("velocity", Some(1)),
    ("ballistic", Some(2)),
    ("state", None),
];

/// Filter model: Euler-discretized dynamics, additive noise.
pub fn reentry_model(config: &ReentryConfig) -> Result<StateSpaceModel> {
    config.validate()?;
    let (dt, gamma, radar) = (config.dt, config.gamma, config.radar);
    let zero = DVector::zeros(3);
    StateSpaceModel::new(
        Box::new(move |x: &DVector<f64>, _k| reentry_discrete_dynamics(x, dt, gamma, &zero)),
        Box::new(move |x: &DVector<f64>| DVector::from_element(1, reentry_range(x, radar))),
        DMatrix::from_diagonal(&DVector::from_column_slice(&config.process_noise_var)),
        DMatrix::from_element(1, 1, config.meas_noise_var),
        config.filter_initial(),
    )
}

/// UKF with `κ = 0, α = 1, β = 2` against GPQKF with UT points (`κ = 0`).
pub fn reentry_default_specs() -> Vec<FilterSpec> {
    let kd = RbfKernelParams::new(0.5, vec![10.0, 10.0, 10.0]).expect("valid kernel");
    let ko = RbfKernelParams::new(0.5, vec![15.0, 20.0, 20.0]).expect("valid kernel");
    vec![
        FilterSpec::classical(
            "UKF",
            Rule::ScaledUnscented {
                kappa: 0.0,
                alpha: 1.0,
                beta: 2.0,
            },
        ),
        FilterSpec::gpq("GPQKF-UT", Rule::Unscented { kappa: 0.0 }, kd, ko),
    ]
}

pub fn reentry_benchmark(config: &ReentryConfig, specs: &[FilterSpec]) -> Result<BenchmarkReport> {
    let truth = reentry_simulate_truth(config)?;
    let model = reentry_model(config)?;
    Harness {
        model: &model,
        truth: &truth,
        dt: config.dt,
        components: &COMPONENTS,
        seed: config.seed,
    }
    .run(specs)
}
