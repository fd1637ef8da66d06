//! Univariate non-stationary growth model benchmark.

use nalgebra::{DMatrix, DVector};

use super::models::{ungm_dynamics, ungm_observation, ungm_simulate};
use super::{BenchmarkReport, FilterSpec, Harness, UngmConfig};
use crate::error::Result;
use crate::filtering::StateSpaceModel;
use crate::gpq::RbfKernelParams;
use crate::sigma_points::Rule;
use crate::transform::GaussianDensity;

pub fn ungm_model(config: &UngmConfig) -> Result<StateSpaceModel> {
    StateSpaceModel::new(
        Box::new(|x: &DVector<f64>, k| DVector::from_element(1, ungm_dynamics(x[0], k))),
        Box::new(|x: &DVector<f64>| DVector::from_element(1, ungm_observation(x[0]))),
        DMatrix::from_element(1, 1, config.process_noise_var),
        DMatrix::from_element(1, 1, config.meas_noise_var),
        GaussianDensity::from_slices(&[config.init_mean], &[config.init_var])?,
    )
}

fn gpq(label: &str, rule: Rule, lengthscale: f64) -> FilterSpec {
    let k = RbfKernelParams::new(1.0, vec![lengthscale]).expect("valid kernel");
    FilterSpec::gpq(label, rule, k.clone(), k)
}

/// The UKF against its GPQ counterpart with UT points.
pub fn ungm_default_specs() -> Vec<FilterSpec> {
    let ut = Rule::Unscented { kappa: 0.0 };
    vec![FilterSpec::classical("UKF", ut), gpq("GPQKF-UT", ut, 3.0)]
}

/// Every classical filter with its GPQ counterpart: UT, SR and GH-{5,7,10,15,20}.
pub fn ungm_full_specs() -> Vec<FilterSpec> {
    let mut specs = ungm_default_specs();
    specs.push(FilterSpec::classical("CKF", Rule::SphericalRadial));
    specs.push(gpq("GPQKF-SR", Rule::SphericalRadial, 0.3));
    for order in [5, 7, 10, 15, 20] {
        let rule = Rule::GaussHermite { order };
        let l = if order == 5 { 0.3 } else { 0.1 };
        specs.push(FilterSpec::classical(format!("GHKF-{order}"), rule));
        specs.push(gpq(&format!("GPQKF-GH-{order}"), rule, l));
    }
    specs
}

pub fn ungm_benchmark(config: &UngmConfig, specs: &[FilterSpec]) -> Result<BenchmarkReport> {
    let truth = ungm_simulate(config)?;
    let model = ungm_model(config)?;
    Harness {
        model: &model,
        truth: &truth,
        dt: 1.0,
        components: &[("x", Some(0))],
        seed: config.seed,
    }
    .run(specs)
}
