//! Closed-form oracles for the moment transforms and the filter.

use approx::assert_abs_diff_eq;
use nalgebra::{DMatrix, DVector};

use gpquad::benchmarks::polar2cartesian;
use gpquad::transform::mc_transform;
use gpquad::{
    classical_transform, gh_points, predict, sr_points, update, ut_points, ClassicalTransform, FnMap,
    GaussianDensity, GpqTransform, MomentTransform, RbfKernelParams, Rule,
};

/// Exact mean, covariance and cross-covariance of (r cos θ, r sin θ) for
/// independent Gaussian r and θ.
fn polar_moments(mr: f64, sr: f64, mt: f64, st: f64) -> (DVector<f64>, DMatrix<f64>, DMatrix<f64>) {
    let e1 = (-0.5 * st * st).exp();
    let e2 = (-2.0 * st * st).exp();
    let r2 = mr * mr + sr * sr;
    let mean = DVector::from_vec(vec![mr * mt.cos() * e1, mr * mt.sin() * e1]);
    let second = DMatrix::from_row_slice(
        2,
        2,
        &[
            r2 * (1.0 + (2.0 * mt).cos() * e2) / 2.0,
            r2 * (2.0 * mt).sin() * e2 / 2.0,
            r2 * (2.0 * mt).sin() * e2 / 2.0,
            r2 * (1.0 - (2.0 * mt).cos() * e2) / 2.0,
        ],
    );
    let cov = second - &mean * mean.transpose();
    let cross = DMatrix::from_row_slice(
        2,
        2,
        &[
            sr * sr * mt.cos() * e1,
            sr * sr * mt.sin() * e1,
            -mr * st * st * mt.sin() * e1,
            mr * st * st * mt.cos() * e1,
        ],
    );
    (mean, cov, cross)
}

fn polar_input(mr: f64, sr: f64, mt: f64, st: f64) -> GaussianDensity {
    GaussianDensity::from_slices(&[mr, mt], &[sr * sr, 0.0, 0.0, st * st]).unwrap()
}

#[test]
fn high_order_gauss_hermite_matches_polar_moments() {
    let g = FnMap::new(2, 2, polar2cartesian);
    let rule = gh_points(2, 20).unwrap();
    for (mr, sr, mt, st) in [(1.0, 0.5, 0.0, 0.1), (4.0, 0.5, 2.3, 0.6), (10.0, 0.2, -1.0, 0.3)] {
        let (mean, cov, cross) = polar_moments(mr, sr, mt, st);
        let r = classical_transform(&g, &polar_input(mr, sr, mt, st), &rule).unwrap();
        assert_abs_diff_eq!(r.out_mean, mean, epsilon = 1e-9);
        assert_abs_diff_eq!(r.out_cov, cov, epsilon = 1e-9);
        assert_abs_diff_eq!(r.cross_cov, cross, epsilon = 1e-9);
    }
}

#[test]
fn monte_carlo_transform_agrees_with_polar_moments() {
    let g = FnMap::new(2, 2, polar2cartesian);
    let (mean, cov, _) = polar_moments(3.0, 0.5, 0.7, 0.4);
    let r = mc_transform(&g, &polar_input(3.0, 0.5, 0.7, 0.4), 200_000, 11).unwrap();
    // ~5 standard errors
    let tol = 5.0 * (cov.max() / 200_000.0).sqrt();
    assert_abs_diff_eq!(r.out_mean, mean, epsilon = tol);
    assert_abs_diff_eq!(r.out_cov, cov, epsilon = 0.02);
}

#[test]
fn gpq_with_dense_points_approaches_polar_moments() {
    let g = FnMap::new(2, 2, polar2cartesian);
    let input = polar_input(2.0, 0.3, 1.0, 0.2);
    let (mean, cov, _) = polar_moments(2.0, 0.3, 1.0, 0.2);
    let t = GpqTransform::new(&gh_points(2, 7).unwrap(), &RbfKernelParams::new(1.0, vec![3.0, 3.0]).unwrap()).unwrap();
    let r = t.apply(&g, &input).unwrap();
    assert_abs_diff_eq!(r.out_mean, mean, epsilon = 1e-4);
    assert_abs_diff_eq!(r.out_cov, cov, epsilon = 1e-4);
    assert!(r.extra.sigma_bar_sq.unwrap() < 1e-4);
}

#[test]
fn single_kalman_step_matches_closed_form() {
    let f = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
    let h = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
    let q = DMatrix::from_row_slice(2, 2, &[0.01, 0.0, 0.0, 0.02]);
    let r = DMatrix::from_element(1, 1, 0.25);
    let prior = GaussianDensity::from_slices(&[1.0, -0.5], &[0.5, 0.1, 0.1, 0.3]).unwrap();
    let z = DVector::from_element(1, 0.7);

    let mp = &f * &prior.mean;
    let pp = &f * &prior.cov * f.transpose() + &q;
    let s = (&h * &pp * h.transpose())[(0, 0)] + r[(0, 0)];
    let gain = &pp * h.transpose() / s;
    let m_exp = &mp + &gain * (z[0] - (&h * &mp)[0]);
    let p_exp = &pp - &gain * gain.transpose() * s;

    for rule in [Rule::Unscented { kappa: 1.0 }, Rule::SphericalRadial, Rule::GaussHermite { order: 2 }] {
        let t = ClassicalTransform::new(rule.points(2).unwrap());
        let fd = f.clone();
        let pred = predict(&t, &prior, &move |x: &DVector<f64>, _| &fd * x, &q, 1).unwrap();
        assert_abs_diff_eq!(pred.mean, mp, epsilon = 1e-12);
        assert_abs_diff_eq!(pred.cov, pp, epsilon = 1e-12);
        let hd = h.clone();
        let up = update(&t, &pred, &move |x: &DVector<f64>| &hd * x, &r, &z).unwrap();
        assert_abs_diff_eq!(up.posterior.mean, m_exp, epsilon = 1e-12);
        assert_abs_diff_eq!(up.posterior.cov, p_exp, epsilon = 1e-12);
        assert_abs_diff_eq!(up.innovation.cov[(0, 0)], s, epsilon = 1e-12);
    }
}

#[test]
fn rules_agree_on_quadratic_expectation() {
    // E[xᵀAx] = tr(AP) + mᵀAm is a degree-2 integrand: every rule is exact
    let a = DMatrix::from_row_slice(3, 3, &[2.0, 0.5, 0.0, 0.5, 1.0, -0.3, 0.0, -0.3, 3.0]);
    let input = GaussianDensity::from_slices(&[0.3, -1.0, 2.0], &[1.0, 0.2, 0.1, 0.2, 0.5, 0.0, 0.1, 0.0, 2.0]).unwrap();
    let exact = (&a * &input.cov).trace() + (input.mean.transpose() * &a * &input.mean)[(0, 0)];
    let ad = a.clone();
    let g = FnMap::new(3, 1, move |x: &DVector<f64>| DVector::from_element(1, (x.transpose() * &ad * x)[(0, 0)]));
    for set in [ut_points(3, 0.0).unwrap(), ut_points(3, 2.0).unwrap(), sr_points(3).unwrap(), gh_points(3, 3).unwrap()] {
        let r = classical_transform(&g, &input, &set).unwrap();
        assert_abs_diff_eq!(r.out_mean[0], exact, epsilon = 1e-10);
    }
}
