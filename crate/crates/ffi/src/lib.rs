//! C ABI for `kdetrack`.
//!
//! Conventions:
//! - every fallible function returns a [`KdtStatus`]; results go through out
//!   pointers that are only written on `KDT_STATUS_OK`;
//! - objects are opaque handles created by `*_new` and released by `*_free`
//!   (freeing NULL is a no-op);
//! - the message for the most recent failure on the calling thread is
//!   available from [`kdt_last_error_message`];
//! - panics never cross the boundary; they surface as `KDT_STATUS_PANIC`.
//!
//! # Safety
//!
//! Every pointer argument must be NULL or valid for the stated length
//! (input arrays for reads, output arrays for writes). Handles must come
//! from the matching `*_new` and must not be used after `*_free`. A handle
//! may be shared across threads for read-only calls, but not while a push
//! or free is in progress.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use kdetrack::mise::{build_components, exact_mise, ib_squared, iv, BatchSummary, MiseComponents};
use kdetrack::weights::{
    average_weights, current_weights, exponential_weights, project_to_simplex,
    solve_optimal_weights, WeightVector,
};
use kdetrack::{
    closed_form_ise, phi, Batch, Error, GaussianParams, ParamMode, Scheme, Tracker, TrackerConfig,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KdtStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    DimensionMismatch = 3,
    Convergence = 4,
    DegenerateBatch = 5,
    MissingTrueParams = 6,
    OutOfOrder = 7,
    Io = 8,
    Parse = 9,
    BufferTooSmall = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KdtScheme {
    Current = 0,
    Average = 1,
    Exponential = 2,
    Dynamic = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KdtParamMode {
    Oracle = 0,
    Plugin = 1,
}

/// Opaque sliding-window tracker.
pub struct KdtTracker {
    inner: Tracker,
}

/// Opaque MISE quadratic form for one window and target.
pub struct KdtComponents {
    inner: MiseComponents,
}

/// Solver diagnostics filled by [`kdt_components_solve`].
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct KdtSolveInfo {
    pub objective: f64,
    pub kkt_residual: f64,
    pub iterations: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &Error) -> KdtStatus {
    match err.root() {
        Error::Domain(_) => KdtStatus::Domain,
        Error::DimensionMismatch { .. } => KdtStatus::DimensionMismatch,
        Error::Convergence { .. } => KdtStatus::Convergence,
        Error::DegenerateBatch { .. } => KdtStatus::DegenerateBatch,
        Error::MissingTrueParams { .. } => KdtStatus::MissingTrueParams,
        Error::OutOfOrder { .. } => KdtStatus::OutOfOrder,
        Error::Io { .. } => KdtStatus::Io,
        Error::Parse { .. } => KdtStatus::Parse,
        Error::Context { .. } => unreachable!("root() strips context"),
    }
}

enum Failure {
    Lib(Error),
    Null(&'static str),
    Buffer { need: usize, have: usize },
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type FfiResult = Result<(), Failure>;

fn guard<F: FnOnce() -> FfiResult>(f: F) -> KdtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KdtStatus::Ok,
        Ok(Err(Failure::Lib(e))) => {
            let status = status_of(&e);
            set_last_error(e.to_string());
            status
        }
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("null pointer: {what}"));
            KdtStatus::NullPointer
        }
        Ok(Err(Failure::Buffer { need, have })) => {
            set_last_error(format!("output buffer holds {have} values, {need} needed"));
            KdtStatus::BufferTooSmall
        }
        Err(_) => {
            set_last_error("internal panic".into());
            KdtStatus::Panic
        }
    }
}

unsafe fn input<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a, T>(p: *mut T, len: usize, what: &'static str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

fn copy_out(src: &[f64], dst: &mut [f64]) -> FfiResult {
    if dst.len() < src.len() {
        return Err(Failure::Buffer {
            need: src.len(),
            have: dst.len(),
        });
    }
    dst[..src.len()].copy_from_slice(src);
    Ok(())
}

unsafe fn weights_in(alpha: *const f64, len: usize) -> Result<WeightVector, Failure> {
    Ok(WeightVector::new(input(alpha, len, "alpha")?.to_vec())?)
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `cap` bytes). Returns the full message length excluding the
/// terminator, or 0 if there is none.
#[no_mangle]
pub unsafe extern "C" fn kdt_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn kdt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

#[no_mangle]
pub unsafe extern "C" fn kdt_phi(scale: f64, z: f64, out: *mut f64) -> KdtStatus {
    guard(|| {
        *out_ref(out, "out")? = phi(scale, z)?;
        Ok(())
    })
}

/// Closed-form ISE between the mixture `sum_k weights[k] N(means[k], sigmas[k]^2)`
/// and `N(target_mu, target_sigma^2)`.
#[no_mangle]
pub unsafe extern "C" fn kdt_closed_form_ise(
    weights: *const f64,
    means: *const f64,
    sigmas: *const f64,
    len: usize,
    target_mu: f64,
    target_sigma: f64,
    out: *mut f64,
) -> KdtStatus {
    guard(|| {
        let w = input(weights, len, "weights")?;
        let m = input(means, len, "means")?;
        let s = input(sigmas, len, "sigmas")?;
        let comps = w
            .iter()
            .zip(m)
            .zip(s)
            .map(|((&w, &m), &s)| Ok((w, GaussianParams::new(m, s)?)))
            .collect::<Result<Vec<_>, Error>>()?;
        let h = kdetrack::MixtureDensity::new(comps)?;
        let target = GaussianParams::new(target_mu, target_sigma)?;
        *out_ref(out, "out")? = closed_form_ise(&h, &target);
        Ok(())
    })
}

/// Writes `len` weights of the requested baseline scheme into `out`.
/// `beta` is only read for the exponential scheme; the dynamic scheme
/// needs MISE components and is rejected here.
#[no_mangle]
pub unsafe extern "C" fn kdt_baseline_weights(
    scheme: KdtScheme,
    len: usize,
    beta: f64,
    out: *mut f64,
) -> KdtStatus {
    guard(|| {
        let w = match scheme {
            KdtScheme::Current => current_weights(len)?,
            KdtScheme::Average => average_weights(len)?,
            KdtScheme::Exponential => exponential_weights(len, beta)?,
            KdtScheme::Dynamic => {
                return Err(Error::Domain("dynamic weights need kdt_components_solve".into()).into())
            }
        };
        copy_out(w.as_slice(), output(out, len, "out")?)
    })
}

#[no_mangle]
pub unsafe extern "C" fn kdt_project_to_simplex(v: *const f64, len: usize, out: *mut f64) -> KdtStatus {
    guard(|| {
        let p = project_to_simplex(input(v, len, "v")?)?;
        copy_out(&p, output(out, len, "out")?)
    })
}

/// Builds the MISE quadratic form for `len` batches given as parallel
/// arrays of means, standard deviations and sample counts.
#[no_mangle]
pub unsafe extern "C" fn kdt_components_new(
    means: *const f64,
    gammas: *const f64,
    counts: *const u64,
    len: usize,
    target_mu: f64,
    target_sigma: f64,
    bandwidth: f64,
    out: *mut *mut KdtComponents,
) -> KdtStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let m = input(means, len, "means")?;
        let g = input(gammas, len, "gammas")?;
        let n = input(counts, len, "counts")?;
        let summaries = m
            .iter()
            .zip(g)
            .zip(n)
            .map(|((&m, &g), &n)| BatchSummary::new(m, g, n as usize))
            .collect::<Result<Vec<_>, Error>>()?;
        let target = GaussianParams::new(target_mu, target_sigma)?;
        let inner = build_components(&summaries, &target, bandwidth)?;
        *out = Box::into_raw(Box::new(KdtComponents { inner }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn kdt_components_free(c: *mut KdtComponents) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

#[no_mangle]
pub unsafe extern "C" fn kdt_components_len(c: *const KdtComponents) -> usize {
    c.as_ref().map_or(0, |c| c.inner.len())
}

#[derive(Clone, Copy)]
enum Measure {
    Mise,
    Bias,
    Variance,
}

unsafe fn measure(
    c: *const KdtComponents,
    alpha: *const f64,
    len: usize,
    out: *mut f64,
    which: Measure,
) -> KdtStatus {
    guard(|| {
        let c = &c.as_ref().ok_or(Failure::Null("components"))?.inner;
        let a = weights_in(alpha, len)?;
        let v = match which {
            Measure::Mise => exact_mise(c, &a)?,
            Measure::Bias => ib_squared(c, &a)?,
            Measure::Variance => iv(c, &a)?,
        };
        *out_ref(out, "out")? = v;
        Ok(())
    })
}

/// Exact MISE at weights `alpha` (length must equal the window length).
#[no_mangle]
pub unsafe extern "C" fn kdt_components_exact_mise(
    c: *const KdtComponents,
    alpha: *const f64,
    len: usize,
    out: *mut f64,
) -> KdtStatus {
    measure(c, alpha, len, out, Measure::Mise)
}

/// Integrated squared bias at `alpha`.
#[no_mangle]
pub unsafe extern "C" fn kdt_components_ib_squared(
    c: *const KdtComponents,
    alpha: *const f64,
    len: usize,
    out: *mut f64,
) -> KdtStatus {
    measure(c, alpha, len, out, Measure::Bias)
}

/// Integrated variance at `alpha`.
#[no_mangle]
pub unsafe extern "C" fn kdt_components_iv(
    c: *const KdtComponents,
    alpha: *const f64,
    len: usize,
    out: *mut f64,
) -> KdtStatus {
    measure(c, alpha, len, out, Measure::Variance)
}

/// Solves for the MISE-optimal weights. `alpha_out` must hold at least the
/// window length; `info` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn kdt_components_solve(
    c: *const KdtComponents,
    alpha_out: *mut f64,
    cap: usize,
    info: *mut KdtSolveInfo,
) -> KdtStatus {
    guard(|| {
        let c = &c.as_ref().ok_or(Failure::Null("components"))?.inner;
        let report = solve_optimal_weights(c)?;
        copy_out(report.alpha.as_slice(), output(alpha_out, cap, "alpha_out")?)?;
        if let Some(info) = info.as_mut() {
            *info = KdtSolveInfo {
                objective: report.objective,
                kkt_residual: report.kkt_residual,
                iterations: report.iterations as u64,
            };
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn kdt_tracker_new(
    window: usize,
    bandwidth: f64,
    scheme: KdtScheme,
    beta: f64,
    mode: KdtParamMode,
    out: *mut *mut KdtTracker,
) -> KdtStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let cfg = TrackerConfig {
            window,
            bandwidth,
            scheme: match scheme {
                KdtScheme::Current => Scheme::Current,
                KdtScheme::Average => Scheme::Average,
                KdtScheme::Exponential => Scheme::Exponential,
                KdtScheme::Dynamic => Scheme::Dynamic,
            },
            beta,
            param_mode: match mode {
                KdtParamMode::Oracle => ParamMode::Oracle,
                KdtParamMode::Plugin => ParamMode::Plugin,
            },
        };
        let inner = Tracker::new(cfg)?;
        *out = Box::into_raw(Box::new(KdtTracker { inner }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn kdt_tracker_free(t: *mut KdtTracker) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of batches currently in the window.
#[no_mangle]
pub unsafe extern "C" fn kdt_tracker_len(t: *const KdtTracker) -> usize {
    t.as_ref().map_or(0, |t| t.inner.len())
}

/// Pushes batch `t` with `n` samples. When `has_true_params` is nonzero,
/// `true_mu`/`true_sigma` are attached (required in oracle mode).
#[no_mangle]
pub unsafe extern "C" fn kdt_tracker_push(
    tracker: *mut KdtTracker,
    t: u64,
    values: *const f64,
    n: usize,
    has_true_params: i32,
    true_mu: f64,
    true_sigma: f64,
) -> KdtStatus {
    guard(|| {
        let tr = tracker.as_mut().ok_or(Failure::Null("tracker"))?;
        let truth = if has_true_params != 0 {
            Some(GaussianParams::new(true_mu, true_sigma)?)
        } else {
            None
        };
        let batch = Batch::new(t, input(values, n, "values")?.to_vec(), truth)?;
        tr.inner.push(batch)?;
        Ok(())
    })
}

/// Weights of the configured scheme against the tracker's default target.
/// Writes the window length to `written`.
#[no_mangle]
pub unsafe extern "C" fn kdt_tracker_weights(
    tracker: *const KdtTracker,
    out: *mut f64,
    cap: usize,
    written: *mut usize,
) -> KdtStatus {
    guard(|| {
        let tr = &tracker.as_ref().ok_or(Failure::Null("tracker"))?.inner;
        let w = tr.weights_for(&tr.default_target()?)?;
        copy_out(w.as_slice(), output(out, cap, "out")?)?;
        if let Some(written) = written.as_mut() {
            *written = w.len();
        }
        Ok(())
    })
}

/// Evaluates the weighted estimator at `x`.
#[no_mangle]
pub unsafe extern "C" fn kdt_tracker_estimate_density(
    tracker: *const KdtTracker,
    alpha: *const f64,
    len: usize,
    x: f64,
    out: *mut f64,
) -> KdtStatus {
    guard(|| {
        let tr = &tracker.as_ref().ok_or(Failure::Null("tracker"))?.inner;
        let a = weights_in(alpha, len)?;
        *out_ref(out, "out")? = tr.estimate_density(&a, x)?;
        Ok(())
    })
}

/// Closed-form ISE of the realized estimator against `N(target_mu, target_sigma^2)`.
#[no_mangle]
pub unsafe extern "C" fn kdt_tracker_ise(
    tracker: *const KdtTracker,
    alpha: *const f64,
    len: usize,
    target_mu: f64,
    target_sigma: f64,
    out: *mut f64,
) -> KdtStatus {
    guard(|| {
        let tr = &tracker.as_ref().ok_or(Failure::Null("tracker"))?.inner;
        let a = weights_in(alpha, len)?;
        let target = GaussianParams::new(target_mu, target_sigma)?;
        *out_ref(out, "out")? = closed_form_ise(&tr.current_mixture(&a)?, &target);
        Ok(())
    })
}
