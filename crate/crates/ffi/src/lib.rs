//! C ABI over the streammoments estimators.
//!
//! Estimators live behind opaque handles created by `sm_*_new` and released
//! by `sm_*_free`. Every fallible call returns an [`SmStatus`]; results are
//! written through out-pointers only on `SM_OK`.

use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use streammoments::budget::SpaceUsage;
use streammoments::derand::{deterministic_fp, DerandConfig};
use streammoments::error::Error;
use streammoments::f2::RandF2;
use streammoments::fp::{FpConfig, RndFp};
use streammoments::stream::{exact_moment_of, Stream};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SmStatus {
    SmOk = 0,
    SmNullPointer = 1,
    SmInvalidArgument = 2,
    SmItemOutOfRange = 3,
    SmNoEstimate = 4,
    SmInsufficientData = 5,
    SmInternal = 6,
}

impl From<&Error> for SmStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::ItemOutOfRange { .. } => SmStatus::SmItemOutOfRange,
            Error::Domain { .. } | Error::Config(_) | Error::BadSlice { .. } => SmStatus::SmInvalidArgument,
            Error::InsufficientData | Error::InsufficientPrefix { .. } | Error::InsufficientBits { .. } => {
                SmStatus::SmInsufficientData
            }
            Error::Profile(_) | Error::Format(_) | Error::Io(_) => SmStatus::SmInternal,
        }
    }
}

/// Opaque second-moment estimator.
pub struct SmF2 {
    inner: RandF2,
    n: u64,
}

/// Opaque randomized p-th moment estimator.
pub struct SmFp {
    inner: RndFp,
    n: u64,
}

fn guard(f: impl FnOnce() -> SmStatus) -> SmStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(SmStatus::SmInternal)
}

fn unit_interval(x: f64) -> bool {
    x > 0.0 && x < 1.0
}

unsafe fn view<'a>(ptr: *const u64, len: usize) -> Option<&'a [u64]> {
    if len == 0 {
        Some(&[])
    } else if ptr.is_null() {
        None
    } else {
        Some(slice::from_raw_parts(ptr, len))
    }
}

fn in_range(batch: &[u64], n: u64) -> bool {
    batch.iter().all(|&a| a >= 1 && a <= n)
}

/// Static, NUL-terminated description of a status code.
#[no_mangle]
pub extern "C" fn sm_status_message(status: SmStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        SmStatus::SmOk => b"ok\0",
        SmStatus::SmNullPointer => b"null pointer argument\0",
        SmStatus::SmInvalidArgument => b"invalid argument\0",
        SmStatus::SmItemOutOfRange => b"item outside [1, n]\0",
        SmStatus::SmNoEstimate => b"estimator returned fail\0",
        SmStatus::SmInsufficientData => b"not enough of the stream was observed\0",
        SmStatus::SmInternal => b"internal error\0",
    };
    s.as_ptr().cast()
}

/// Creates a second-moment estimator for items in `[1, n]`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn sm_f2_new(epsilon: f64, delta: f64, n: u64, out: *mut *mut SmF2) -> SmStatus {
    if out.is_null() {
        return SmStatus::SmNullPointer;
    }
    if !unit_interval(epsilon) || !unit_interval(delta) || n == 0 {
        return SmStatus::SmInvalidArgument;
    }
    guard(|| {
        let h = Box::new(SmF2 { inner: RandF2::with_accuracy(epsilon, delta, n), n });
        *out = Box::into_raw(h);
        SmStatus::SmOk
    })
}

/// Feeds `len` items. On `SM_ITEM_OUT_OF_RANGE` nothing is consumed.
///
/// # Safety
/// `h` must come from [`sm_f2_new`]; `items` must point to `len` values.
#[no_mangle]
pub unsafe extern "C" fn sm_f2_update(h: *mut SmF2, items: *const u64, len: usize) -> SmStatus {
    let (Some(h), Some(batch)) = (h.as_mut(), view(items, len)) else {
        return SmStatus::SmNullPointer;
    };
    if !in_range(batch, h.n) {
        return SmStatus::SmItemOutOfRange;
    }
    guard(|| {
        for &a in batch {
            h.inner.update(a);
        }
        SmStatus::SmOk
    })
}

/// # Safety
/// `h` must come from [`sm_f2_new`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sm_f2_estimate(h: *const SmF2, out: *mut f64) -> SmStatus {
    let Some(h) = h.as_ref() else { return SmStatus::SmNullPointer };
    if out.is_null() {
        return SmStatus::SmNullPointer;
    }
    match h.inner.estimate() {
        Ok(y) => {
            *out = y;
            SmStatus::SmOk
        }
        Err(e) => SmStatus::from(&e),
    }
}

/// Bits of state currently held; 0 for a null handle.
///
/// # Safety
/// `h` must be null or come from [`sm_f2_new`].
#[no_mangle]
pub unsafe extern "C" fn sm_f2_bits(h: *const SmF2) -> u64 {
    h.as_ref().map_or(0, |h| h.inner.bits())
}

/// # Safety
/// `h` must be null or come from [`sm_f2_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sm_f2_free(h: *mut SmF2) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Creates a p-th moment estimator, `0 < p < 2`. `copies == 0` picks the
/// count from `delta`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn sm_fp_new(
    p: f64,
    epsilon: f64,
    delta: f64,
    n: u64,
    seed: u64,
    copies: u32,
    out: *mut *mut SmFp,
) -> SmStatus {
    if out.is_null() {
        return SmStatus::SmNullPointer;
    }
    guard(|| {
        let cfg = FpConfig { copies: (copies > 0).then_some(copies as usize), ..FpConfig::default() };
        match RndFp::new(p, epsilon, delta, n, seed, cfg) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(SmFp { inner, n }));
                SmStatus::SmOk
            }
            Err(e) => SmStatus::from(&e),
        }
    })
}

/// Feeds `len` items. On `SM_ITEM_OUT_OF_RANGE` nothing is consumed.
///
/// # Safety
/// `h` must come from [`sm_fp_new`]; `items` must point to `len` values.
#[no_mangle]
pub unsafe extern "C" fn sm_fp_update(h: *mut SmFp, items: *const u64, len: usize) -> SmStatus {
    let (Some(h), Some(batch)) = (h.as_mut(), view(items, len)) else {
        return SmStatus::SmNullPointer;
    };
    if !in_range(batch, h.n) {
        return SmStatus::SmItemOutOfRange;
    }
    guard(|| {
        h.inner.update_all(batch);
        SmStatus::SmOk
    })
}

/// Writes the current estimate, or returns `SM_NO_ESTIMATE` if every copy
/// failed.
///
/// # Safety
/// `h` must come from [`sm_fp_new`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sm_fp_estimate(h: *const SmFp, out: *mut f64) -> SmStatus {
    let Some(h) = h.as_ref() else { return SmStatus::SmNullPointer };
    if out.is_null() {
        return SmStatus::SmNullPointer;
    }
    match h.inner.query() {
        Some(v) => {
            *out = v;
            SmStatus::SmOk
        }
        None => SmStatus::SmNoEstimate,
    }
}

/// Peak bits over the stream so far; 0 for a null handle.
///
/// # Safety
/// `h` must be null or come from [`sm_fp_new`].
#[no_mangle]
pub unsafe extern "C" fn sm_fp_peak_bits(h: *const SmFp) -> u64 {
    h.as_ref().map_or(0, |h| h.inner.peak_bits())
}

/// # Safety
/// `h` must be null or come from [`sm_fp_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sm_fp_free(h: *mut SmFp) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Runs the deterministic estimator over a whole stream held in memory.
///
/// # Safety
/// `items` must point to `len` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sm_fp_deterministic(
    p: f64,
    epsilon: f64,
    delta: f64,
    n: u64,
    items: *const u64,
    len: usize,
    copies: u32,
    out: *mut f64,
) -> SmStatus {
    let Some(batch) = view(items, len) else { return SmStatus::SmNullPointer };
    if out.is_null() {
        return SmStatus::SmNullPointer;
    }
    guard(|| {
        let stream = match Stream::new(n, batch.to_vec()) {
            Ok(s) => s,
            Err(e) => return SmStatus::from(&e),
        };
        let cfg = FpConfig { copies: (copies > 0).then_some(copies as usize), ..FpConfig::default() };
        match deterministic_fp(p, epsilon, delta, n, &mut stream.cursor(), &DerandConfig::default(), cfg) {
            Ok(o) => {
                *out = o.estimate;
                SmStatus::SmOk
            }
            Err(e) => SmStatus::from(&e),
        }
    })
}

/// Exact `Σ f_i^p` of a stream held in memory, `p ≥ 0`.
///
/// # Safety
/// `items` must point to `len` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sm_exact_moment(items: *const u64, len: usize, p: f64, out: *mut f64) -> SmStatus {
    let Some(batch) = view(items, len) else { return SmStatus::SmNullPointer };
    if out.is_null() {
        return SmStatus::SmNullPointer;
    }
    if !(p >= 0.0) {
        return SmStatus::SmInvalidArgument;
    }
    *out = exact_moment_of(batch, p);
    SmStatus::SmOk
}
