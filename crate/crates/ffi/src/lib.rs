//! C interface to the gpquad moment transforms.
//!
//! Objects are opaque handles created by `*_new` functions and released with
//! the matching `*_free`. Every fallible call returns a [`GpqStatus`]; on
//! failure, [`gpq_last_error`] gives a message for the calling thread.
//!
//! Matrices cross the boundary as row-major `double` arrays.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, c_void, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use gpquad::benchmarks::skl;
use gpquad::gpq::GpqWeights;
use gpquad::transform::{classical_transform, GaussianDensity, MomentTransformResult, VectorFunction};
use gpquad::{gpq_transform, gpq_weights, Error, RbfKernelParams, Rule, UnitPointSet};
use nalgebra::{DMatrix, DVector};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GpqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ResourceLimit = 3,
    Numerical = 4,
    CallbackFailed = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GpqRule {
    Unscented = 0,
    SphericalRadial = 1,
    GaussHermite = 2,
}

/// Unit sigma-point set.
pub struct GpqPoints {
    set: UnitPointSet,
}

/// Moment transform bound to a point set: classical weights or GPQ weights.
pub struct GpqTransform {
    set: UnitPointSet,
    gpq: Option<GpqWeights>,
}

/// Integrand callback. Writes `out_dim` values for the point `x` of length
/// `in_dim` into `y`; returns 0 on success.
pub type GpqFunction = Option<
    unsafe extern "C" fn(x: *const f64, in_dim: usize, y: *mut f64, out_dim: usize, user_data: *mut c_void) -> c_int,
>;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> GpqStatus {
    match e.root() {
        Error::InvalidParameter(_) | Error::DimensionMismatch(_) => GpqStatus::InvalidArgument,
        Error::ResourceLimit { .. } => GpqStatus::ResourceLimit,
        _ => GpqStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (GpqStatus, String)>) -> GpqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GpqStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            GpqStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (GpqStatus, String) {
    (status_of(&e), e.to_string())
}

fn null() -> (GpqStatus, String) {
    (GpqStatus::NullPointer, "null pointer argument".into())
}

unsafe fn read<'a>(p: *const f64, n: usize) -> Result<&'a [f64], (GpqStatus, String)> {
    if p.is_null() {
        return Err(null());
    }
    Ok(slice::from_raw_parts(p, n))
}

unsafe fn write(p: *mut f64, vals: impl IntoIterator<Item = f64>) -> Result<(), (GpqStatus, String)> {
    if p.is_null() {
        return Err(null());
    }
    for (i, v) in vals.into_iter().enumerate() {
        *p.add(i) = v;
    }
    Ok(())
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().iter().copied().collect()
}

unsafe fn density(dim: usize, mean: *const f64, cov: *const f64) -> Result<GaussianDensity, (GpqStatus, String)> {
    let m = read(mean, dim)?;
    let c = read(cov, dim * dim)?;
    GaussianDensity::new(DVector::from_column_slice(m), DMatrix::from_row_slice(dim, dim, c)).map_err(lib_err)
}

/// Message for the last failed call on this thread; empty if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gpq_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a unit point set. `param` is kappa for the unscented rule and is
/// ignored otherwise; `order` is used by Gauss-Hermite only.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn gpq_points_new(
    rule: GpqRule,
    dim: usize,
    param: f64,
    order: usize,
    out: *mut *mut GpqPoints,
) -> GpqStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let rule = match rule {
            GpqRule::Unscented => Rule::Unscented { kappa: param },
            GpqRule::SphericalRadial => Rule::SphericalRadial,
            GpqRule::GaussHermite => Rule::GaussHermite { order },
        };
        let set = rule.points(dim).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(GpqPoints { set }));
        Ok(())
    })
}

/// # Safety
/// `points` must be null or a handle from [`gpq_points_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gpq_points_free(points: *mut GpqPoints) {
    if !points.is_null() {
        drop(Box::from_raw(points));
    }
}

/// # Safety
/// `points` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gpq_points_dim(points: *const GpqPoints) -> usize {
    points.as_ref().map_or(0, |p| p.set.dim())
}

/// # Safety
/// `points` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gpq_points_len(points: *const GpqPoints) -> usize {
    points.as_ref().map_or(0, |p| p.set.len())
}

/// Copies the points (N×D, one point per row) and both weight vectors.
/// Any output pointer may be null to skip it.
///
/// # Safety
/// Non-null outputs must hold N·D, N and N doubles respectively.
#[no_mangle]
pub unsafe extern "C" fn gpq_points_copy(
    points: *const GpqPoints,
    xi: *mut f64,
    mean_weights: *mut f64,
    cov_weights: *mut f64,
) -> GpqStatus {
    guard(|| {
        let p = points.as_ref().ok_or_else(null)?;
        if !xi.is_null() {
            write(xi, p.set.points.iter().copied())?;
        }
        if !mean_weights.is_null() {
            write(mean_weights, p.set.mean_weights.iter().copied())?;
        }
        if !cov_weights.is_null() {
            write(cov_weights, p.set.cov_weights.iter().copied())?;
        }
        Ok(())
    })
}

/// Classical transform using the rule's own weights.
///
/// # Safety
/// `points` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gpq_transform_new_classical(
    points: *const GpqPoints,
    out: *mut *mut GpqTransform,
) -> GpqStatus {
    guard(|| {
        let p = points.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        *out = Box::into_raw(Box::new(GpqTransform {
            set: p.set.clone(),
            gpq: None,
        }));
        Ok(())
    })
}

/// GPQ transform with an RBF kernel. `n_lengthscales` is 1 (isotropic) or
/// the point dimension.
///
/// # Safety
/// `points` must be a live handle, `lengthscales` must hold
/// `n_lengthscales` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gpq_transform_new_gpq(
    points: *const GpqPoints,
    alpha: f64,
    lengthscales: *const f64,
    n_lengthscales: usize,
    out: *mut *mut GpqTransform,
) -> GpqStatus {
    guard(|| {
        let p = points.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        let ls = read(lengthscales, n_lengthscales)?.to_vec();
        let params = RbfKernelParams::new(alpha, ls).map_err(lib_err)?;
        let w = gpq_weights(&p.set.points, &params).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(GpqTransform {
            set: p.set.clone(),
            gpq: Some(w),
        }));
        Ok(())
    })
}

/// # Safety
/// `transform` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gpq_transform_free(transform: *mut GpqTransform) {
    if !transform.is_null() {
        drop(Box::from_raw(transform));
    }
}

/// Integral variance of a GPQ transform; 0 for a classical one.
///
/// # Safety
/// `transform` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gpq_transform_integral_variance(transform: *const GpqTransform) -> f64 {
    transform
        .as_ref()
        .and_then(|t| t.gpq.as_ref())
        .map_or(0.0, |w| w.sigma_bar_sq)
}

struct Callback {
    f: unsafe extern "C" fn(*const f64, usize, *mut f64, usize, *mut c_void) -> c_int,
    user_data: *mut c_void,
    in_dim: usize,
    out_dim: usize,
    failed: std::sync::atomic::AtomicI32,
}

// Evaluation is sequential on the calling thread.
unsafe impl Sync for Callback {}

impl VectorFunction for Callback {
    fn input_dim(&self) -> usize {
        self.in_dim
    }

    fn output_dim(&self) -> usize {
        self.out_dim
    }

    fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut y = DVector::from_element(self.out_dim, f64::NAN);
        let rc = unsafe { (self.f)(x.as_ptr(), self.in_dim, y.as_mut_ptr(), self.out_dim, self.user_data) };
        if rc != 0 {
            self.failed.store(rc, std::sync::atomic::Ordering::Relaxed);
            y.fill(f64::NAN);
        }
        y
    }
}

/// Pushes N(mean, cov) of dimension `in_dim` through `f` with `out_dim`
/// outputs. Writes the output mean (E), covariance (E×E) and input-output
/// cross-covariance (D×E). `cross_cov` may be null.
///
/// # Safety
/// `mean`/`cov` must hold D and D·D doubles, the outputs E, E·E and D·E.
/// `f` is called on the current thread only.
#[no_mangle]
pub unsafe extern "C" fn gpq_transform_apply(
    transform: *const GpqTransform,
    f: GpqFunction,
    user_data: *mut c_void,
    in_dim: usize,
    out_dim: usize,
    mean: *const f64,
    cov: *const f64,
    out_mean: *mut f64,
    out_cov: *mut f64,
    cross_cov: *mut f64,
) -> GpqStatus {
    guard(|| {
        let t = transform.as_ref().ok_or_else(null)?;
        let f = f.ok_or_else(null)?;
        if out_dim == 0 {
            return Err((GpqStatus::InvalidArgument, "output dimension must be positive".into()));
        }
        let input = density(in_dim, mean, cov)?;
        let cb = Callback {
            f,
            user_data,
            in_dim,
            out_dim,
            failed: 0.into(),
        };
        let result: Result<MomentTransformResult, Error> = match &t.gpq {
            Some(w) => gpq_transform(&cb, &input, w),
            None => classical_transform(&cb, &input, &t.set),
        };
        let rc = cb.failed.load(std::sync::atomic::Ordering::Relaxed);
        if rc != 0 {
            return Err((GpqStatus::CallbackFailed, format!("callback returned {rc}")));
        }
        let r = result.map_err(lib_err)?;
        write(out_mean, r.out_mean.iter().copied())?;
        write(out_cov, row_major(&r.out_cov))?;
        if !cross_cov.is_null() {
            write(cross_cov, row_major(&r.cross_cov))?;
        }
        Ok(())
    })
}

/// Symmetrised KL divergence between two Gaussians of dimension `dim`.
///
/// # Safety
/// Means must hold `dim` doubles, covariances `dim·dim`, `out` one.
#[no_mangle]
pub unsafe extern "C" fn gpq_skl(
    dim: usize,
    mean_a: *const f64,
    cov_a: *const f64,
    mean_b: *const f64,
    cov_b: *const f64,
    out: *mut f64,
) -> GpqStatus {
    guard(|| {
        let a = density(dim, mean_a, cov_a)?;
        let b = density(dim, mean_b, cov_b)?;
        let v = skl(&a, &b).map_err(lib_err)?;
        if out.is_null() {
            return Err(null());
        }
        *out = v;
        Ok(())
    })
}
