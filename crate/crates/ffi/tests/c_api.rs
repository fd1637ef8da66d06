use std::ffi::{c_int, c_void, CStr};
use std::process::Command;
use std::ptr;

use gpquad_ffi::*;

unsafe extern "C" fn polar(x: *const f64, _: usize, y: *mut f64, _: usize, _: *mut c_void) -> c_int {
    let (r, t) = (*x, *x.add(1));
    *y = r * t.cos();
    *y.add(1) = r * t.sin();
    0
}

unsafe extern "C" fn affine(x: *const f64, d: usize, y: *mut f64, _: usize, data: *mut c_void) -> c_int {
    let a = *(data as *const f64);
    let mut s = 0.0;
    for i in 0..d {
        s += *x.add(i);
    }
    *y = a * s + 1.0;
    0
}

unsafe extern "C" fn failing(_: *const f64, _: usize, _: *mut f64, _: usize, _: *mut c_void) -> c_int {
    7
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(gpq_last_error()) }.to_string_lossy().into_owned()
}

fn points(rule: GpqRule, dim: usize) -> *mut GpqPoints {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { gpq_points_new(rule, dim, 0.0, 3, &mut p) }, GpqStatus::Ok);
    p
}

#[test]
fn point_set_roundtrip() {
    let p = points(GpqRule::Unscented, 2);
    unsafe {
        assert_eq!(gpq_points_dim(p), 2);
        assert_eq!(gpq_points_len(p), 5);
        let mut xi = [0.0; 10];
        let mut wm = [0.0; 5];
        assert_eq!(gpq_points_copy(p, xi.as_mut_ptr(), wm.as_mut_ptr(), ptr::null_mut()), GpqStatus::Ok);
        assert!((xi[2] - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(xi[3], 0.0);
        assert!((wm.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        gpq_points_free(p);
    }
}

#[test]
fn gauss_hermite_budget_is_reported() {
    let mut p = ptr::null_mut();
    let s = unsafe { gpq_points_new(GpqRule::GaussHermite, 20, 0.0, 10, &mut p) };
    assert_eq!(s, GpqStatus::ResourceLimit);
    assert!(p.is_null());
    assert!(last_error().contains("100000"));
}

#[test]
fn classical_is_exact_on_affine_maps() {
    let p = points(GpqRule::SphericalRadial, 3);
    let mean = [0.5, -1.0, 2.0];
    let cov = [2.0, 0.3, 0.0, 0.3, 1.0, 0.1, 0.0, 0.1, 0.5];
    let mut a = 2.0f64;
    let data = &mut a as *mut f64 as *mut c_void;
    let expect_mean = 2.0 * 1.5 + 1.0;
    let expect_var = 4.0 * (2.0 + 1.0 + 0.5 + 2.0 * (0.3 + 0.1));
    unsafe {
        let mut c = ptr::null_mut();
        assert_eq!(gpq_transform_new_classical(p, &mut c), GpqStatus::Ok);
        let mut g = ptr::null_mut();
        let ls = [1.0];
        assert_eq!(gpq_transform_new_gpq(p, 1.0, ls.as_ptr(), 1, &mut g), GpqStatus::Ok);
        assert!(gpq_transform_integral_variance(g) > 0.0);
        assert_eq!(gpq_transform_integral_variance(c), 0.0);
        for t in [c, g] {
            let (mut m, mut v, mut cc) = ([0.0], [0.0], [0.0; 3]);
            let s = gpq_transform_apply(
                t, Some(affine), data, 3, 1, mean.as_ptr(), cov.as_ptr(),
                m.as_mut_ptr(), v.as_mut_ptr(), cc.as_mut_ptr(),
            );
            assert_eq!(s, GpqStatus::Ok);
            if t == c {
                assert!((m[0] - expect_mean).abs() < 1e-9);
                assert!((v[0] - expect_var).abs() < 1e-9);
                assert!((cc[0] - 2.0 * 2.3).abs() < 1e-9);
            } else {
                assert!(m[0].is_finite() && v[0] > 0.0);
            }
        }
        gpq_transform_free(c);
        gpq_transform_free(g);
        gpq_points_free(p);
    }
}

#[test]
fn polar_transform_matches_core() {
    let p = points(GpqRule::SphericalRadial, 2);
    let mut t = ptr::null_mut();
    let ls = [60.0, 6.0];
    let mean = [1.0, 0.0];
    let cov = [0.25, 0.0, 0.0, 0.01];
    let (mut m, mut v) = ([0.0; 2], [0.0; 4]);
    unsafe {
        assert_eq!(gpq_transform_new_gpq(p, 1.0, ls.as_ptr(), 2, &mut t), GpqStatus::Ok);
        let s = gpq_transform_apply(
            t, Some(polar), ptr::null_mut(), 2, 2, mean.as_ptr(), cov.as_ptr(),
            m.as_mut_ptr(), v.as_mut_ptr(), ptr::null_mut(),
        );
        assert_eq!(s, GpqStatus::Ok);
        gpq_transform_free(t);
        gpq_points_free(p);
    }
    let set = gpquad::sr_points(2).unwrap();
    let core = gpquad::GpqTransform::new(&set, &gpquad::RbfKernelParams::new(1.0, vec![60.0, 6.0]).unwrap()).unwrap();
    let g = gpquad::FnMap::new(2, 2, gpquad::benchmarks::polar2cartesian);
    let input = gpquad::GaussianDensity::from_slices(&mean, &cov).unwrap();
    use gpquad::MomentTransform;
    let r = core.apply(&g, &input).unwrap();
    assert_eq!(m[0], r.out_mean[0]);
    assert_eq!(v[3], r.out_cov[(1, 1)]);
}

#[test]
fn callback_failure_and_bad_input() {
    let p = points(GpqRule::Unscented, 1);
    let mut t = ptr::null_mut();
    let (mut m, mut v) = ([0.0], [0.0]);
    unsafe {
        assert_eq!(gpq_transform_new_classical(p, &mut t), GpqStatus::Ok);
        let s = gpq_transform_apply(
            t, Some(failing), ptr::null_mut(), 1, 1, [0.0].as_ptr(), [1.0].as_ptr(),
            m.as_mut_ptr(), v.as_mut_ptr(), ptr::null_mut(),
        );
        assert_eq!(s, GpqStatus::CallbackFailed);
        assert!(last_error().contains('7'));
        let s = gpq_transform_apply(
            t, Some(polar), ptr::null_mut(), 1, 1, [0.0].as_ptr(), [f64::NAN].as_ptr(),
            m.as_mut_ptr(), v.as_mut_ptr(), ptr::null_mut(),
        );
        assert_eq!(s, GpqStatus::InvalidArgument);
        let s = gpq_transform_apply(
            t, None, ptr::null_mut(), 1, 1, [0.0].as_ptr(), [1.0].as_ptr(),
            m.as_mut_ptr(), v.as_mut_ptr(), ptr::null_mut(),
        );
        assert_eq!(s, GpqStatus::NullPointer);
        gpq_transform_free(t);
        gpq_points_free(p);
        gpq_points_free(ptr::null_mut());
    }
}

#[test]
fn skl_between_gaussians() {
    let mut out = -1.0;
    let s = unsafe {
        gpq_skl(1, [0.0].as_ptr(), [1.0].as_ptr(), [1.0].as_ptr(), [2.0].as_ptr(), &mut out)
    };
    assert_eq!(s, GpqStatus::Ok);
    assert!((out - 0.5).abs() < 1e-12);
    let s = unsafe {
        gpq_skl(1, [0.0].as_ptr(), [1.0].as_ptr(), [0.0].as_ptr(), [0.0].as_ptr(), &mut out)
    };
    assert_eq!(s, GpqStatus::Numerical);
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/gpquad.h");
    assert!(std::fs::read_to_string(header).unwrap().contains("gpq_transform_apply"));
    let dir = std::env::temp_dir().join(format!("gpquad_hdr_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("t.c");
    std::fs::write(&src, "#include \"gpquad.h\"\nint main(void) { GpqPoints *p = 0; return gpq_points_new(GPQ_RULE_UNSCENTED, 1, 0.0, 0, &p) == GPQ_STATUS_OK ? 0 : 1; }\n").unwrap();
    let Ok(out) = Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-I", concat!(env!("CARGO_MANIFEST_DIR"), "/include")])
        .arg(&src)
        .output()
    else {
        eprintln!("no C compiler; skipping syntax check");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
