//! Gaussian process quadrature moment transforms, classical sigma-point rules,
//! a generic Gaussian filter built on them, and the benchmark harness.

pub mod benchmarks;
pub mod cli;
pub mod error;
pub mod filtering;
pub mod gpq;
pub mod linalg;
pub mod sigma_points;
pub mod transform;

pub use error::{Error, Result};
pub use filtering::{predict, run_filter, update, FilterRun, StateSpaceModel};
pub use gpq::{gpq_transform, gpq_weights, GpqTransform, GpqWeights, RbfKernelParams};
pub use sigma_points::{gh_points, hermite_rule_1d, sr_points, ut_points, Rule, UnitPointSet};
pub use transform::{
    classical_transform, mc_transform, ClassicalTransform, FnMap, GaussianDensity, MomentTransform,
    MomentTransformResult, VectorFunction,
};
