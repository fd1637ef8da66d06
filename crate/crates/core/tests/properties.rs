use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use gpquad::benchmarks::{bootstrap_ci, skl};
use gpquad::cli::fmt_num;
use gpquad::gpq::gp_posterior;
use gpquad::linalg::{is_psd, min_eigenvalue};
use gpquad::{
    classical_transform, gpq_weights, update, ClassicalTransform, FnMap, GaussianDensity, RbfKernelParams, Rule,
};

fn spd(dim: usize, entries: &[f64], ridge: f64) -> DMatrix<f64> {
    let a = DMatrix::from_fn(dim, dim, |i, j| entries[i * dim + j]);
    &a * a.transpose() + DMatrix::identity(dim, dim) * ridge
}

fn density(dim: usize) -> impl Strategy<Value = GaussianDensity> {
    (
        prop::collection::vec(-5.0..5.0f64, dim),
        prop::collection::vec(-1.5..1.5f64, dim * dim),
        0.05..2.0f64,
    )
        .prop_map(move |(m, a, ridge)| GaussianDensity::new(DVector::from_vec(m), spd(dim, &a, ridge)).unwrap())
}

fn rule() -> impl Strategy<Value = Rule> {
    prop_oneof![
        (0.0..3.0f64).prop_map(|kappa| Rule::Unscented { kappa }),
        Just(Rule::SphericalRadial),
        (2usize..6).prop_map(|order| Rule::GaussHermite { order }),
        (0.5..1.0f64, 0.0..2.0f64).prop_map(|(alpha, beta)| Rule::ScaledUnscented { kappa: 0.0, alpha, beta }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unit_weights_sum_to_one(r in rule(), dim in 1usize..5) {
        let set = r.points(dim).unwrap();
        prop_assert!((set.mean_weights.sum() - 1.0).abs() < 1e-12);
        // first and second unit moments
        let mean = &set.points * &set.mean_weights;
        prop_assert!(mean.amax() < 1e-12);
        let second = &set.points * DMatrix::from_diagonal(&set.mean_weights) * set.points.transpose();
        prop_assert!((second - DMatrix::identity(dim, dim)).amax() < 1e-11);
    }

    #[test]
    fn classical_rules_are_exact_for_affine_maps(
        r in rule(),
        input in density(3),
        a in prop::collection::vec(-2.0..2.0f64, 6),
        b in prop::collection::vec(-2.0..2.0f64, 2),
    ) {
        let a = DMatrix::from_row_slice(2, 3, &a);
        let b = DVector::from_vec(b);
        let (ad, bd) = (a.clone(), b.clone());
        let g = FnMap::new(3, 2, move |x: &DVector<f64>| &ad * x + &bd);
        let out = classical_transform(&g, &input, &r.points(3).unwrap()).unwrap();
        let scale = 1.0 + input.cov.amax() + input.mean.amax();
        prop_assert!((out.out_mean - (&a * &input.mean + &b)).amax() < 1e-10 * scale);
        prop_assert!((out.out_cov - &a * &input.cov * a.transpose()).amax() < 1e-10 * scale);
        prop_assert!((out.cross_cov - &input.cov * a.transpose()).amax() < 1e-10 * scale);
    }

    #[test]
    fn gpq_output_and_joint_covariance_are_psd(
        r in rule(),
        dim in 1usize..4,
        alpha in 0.1..10.0f64,
        ell in 0.2..4.0f64,
        seed_vals in prop::collection::vec(-50.0..50.0f64, 2 * 81),
        input in density(3),
    ) {
        let set = r.points(dim).unwrap();
        let w = gpq_weights(&set.points, &RbfKernelParams::isotropic(alpha, ell, dim).unwrap()).unwrap();
        let y = DMatrix::from_fn(2, set.len(), |i, j| seed_vals[(i * 81 + j) % seed_vals.len()]);
        let (_, cov, cross) = w.moments_from_values(&y);
        prop_assert!(is_psd(&cov, 1e-9));
        let p = input.cov.view((0, 0), (dim, dim)).into_owned();
        let c = p.clone().cholesky().unwrap().l() * cross;
        let mut joint = DMatrix::zeros(dim + 2, dim + 2);
        joint.view_mut((0, 0), (dim, dim)).copy_from(&p);
        joint.view_mut((0, dim), (dim, 2)).copy_from(&c);
        joint.view_mut((dim, 0), (2, dim)).copy_from(&c.transpose());
        joint.view_mut((dim, dim), (2, 2)).copy_from(&cov);
        prop_assert!(is_psd(&joint, 1e-9));
        prop_assert!(w.sigma_bar_sq >= 0.0 && w.sigma_bar_sq <= alpha * alpha * (1.0 + 1e-12));
    }

    #[test]
    fn gpq_weights_do_not_depend_on_alpha(r in rule(), dim in 1usize..4, ell in 0.3..3.0f64, alpha in 0.05..20.0f64) {
        let set = r.points(dim).unwrap();
        let base = gpq_weights(&set.points, &RbfKernelParams::isotropic(1.0, ell, dim).unwrap()).unwrap();
        let w = gpq_weights(&set.points, &RbfKernelParams::isotropic(alpha, ell, dim).unwrap()).unwrap();
        prop_assert!((&w.w_mean - &base.w_mean).amax() <= 1e-9);
        prop_assert!((&w.w_cov - &base.w_cov).amax() <= 1e-9);
        prop_assert!((&w.w_cross - &base.w_cross).amax() <= 1e-9);
        prop_assert!((w.sigma_bar_sq - alpha * alpha * base.sigma_bar_sq).abs() <= 1e-9 * alpha * alpha);
    }

    #[test]
    fn skl_is_nonnegative_symmetric_and_zero_on_the_diagonal(a in density(2), b in density(2)) {
        let ab = skl(&a, &b).unwrap();
        prop_assert!(ab >= -1e-12);
        prop_assert!((ab - skl(&b, &a).unwrap()).abs() <= 1e-9 * (1.0 + ab));
        prop_assert!(skl(&a, &a).unwrap().abs() < 1e-10);
    }

    #[test]
    fn gp_posterior_interpolates(
        pts in prop::collection::vec(-3.0..3.0f64, 2..8),
        vals in prop::collection::vec(-10.0..10.0f64, 8),
        alpha in 0.2..5.0f64,
        ell in 0.3..1.5f64,
    ) {
        let mut pts = pts;
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() < 0.2);
        let n = pts.len();
        let points = DMatrix::from_row_slice(1, n, &pts);
        let values = DVector::from_fn(n, |i, _| vals[i]);
        let params = RbfKernelParams::new(alpha, vec![ell]).unwrap();
        for i in 0..n {
            let (m, v) = gp_posterior(&points, &values, &params, &[pts[i]]).unwrap();
            prop_assert!((m - vals[i]).abs() < 1e-6);
            prop_assert!(v <= 1e-6 * alpha * alpha);
        }
    }

    #[test]
    fn update_never_increases_covariance(prior in density(2), z in -5.0..5.0f64, r in 0.01..4.0f64) {
        let t = ClassicalTransform::new(Rule::SphericalRadial.points(2).unwrap());
        let h = |x: &DVector<f64>| DVector::from_element(1, x[0] * x[0] * 0.1 + x[1]);
        let up = update(&t, &prior, &h, &DMatrix::from_element(1, 1, r), &DVector::from_element(1, z)).unwrap();
        let diff = &prior.cov - &up.posterior.cov;
        prop_assert!(min_eigenvalue(&diff) >= -1e-10 * prior.cov.amax());
        prop_assert!(is_psd(&up.posterior.cov, 1e-9));
    }

    #[test]
    fn number_format_keeps_twelve_digits(x in prop::num::f64::NORMAL) {
        let back: f64 = fmt_num(x).parse().unwrap();
        prop_assert!((back - x).abs() <= 1e-11 * x.abs());
    }

    #[test]
    fn bootstrap_band_is_deterministic_and_nonnegative(vals in prop::collection::vec(-100.0..100.0f64, 2..40), seed in any::<u64>()) {
        let a = bootstrap_ci(&vals, 200, seed).unwrap();
        let b = bootstrap_ci(&vals, 200, seed).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!(a.band >= 0.0);
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        prop_assert!((a.mean - mean).abs() < 1e-9);
    }
}
