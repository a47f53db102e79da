//! C ABI for the etide optimization library.
//!
//! The surface is handle-based: [`EtideSuite`] owns a benchmark suite,
//! [`EtideRun`] owns one finished optimization run. Every function returns
//! an [`EtideStatus`] (or a value with a documented sentinel); nothing
//! unwinds across the boundary. Strings returned as `char*` are owned by
//! the caller and must be released with [`etide_string_free`].
//!
//! The matching header is generated into `include/etide.h` at build time.

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use etide::benchfn::{make_suite, manifest, ObjectiveFunction};
use etide::harness::{run_cell, RunRecord};
use etide::variants::named_config;

/// Result codes for every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EtideStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownAlgorithm = 3,
    OutOfRange = 4,
    InternalError = 5,
}

/// Opaque handle to an immutable benchmark suite.
pub struct EtideSuite {
    seed: u64,
    functions: Vec<ObjectiveFunction>,
}

/// Opaque handle to one finished optimization run.
pub struct EtideRun {
    record: RunRecord,
}

fn to_c_string(s: String) -> *mut c_char {
    match CString::new(s) {
        Ok(c) => c.into_raw(),
        Err(_) => std::ptr::null_mut(),
    }
}

/// Build the deterministic benchmark suite for `(seed, dimension)` and
/// store a handle in `out`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn etide_suite_new(
    seed: u64,
    dimension: usize,
    out: *mut *mut EtideSuite,
) -> EtideStatus {
    if out.is_null() {
        return EtideStatus::NullPointer;
    }
    match make_suite(seed, dimension) {
        Ok(functions) => {
            let handle = Box::new(EtideSuite { seed, functions });
            unsafe { *out = Box::into_raw(handle) };
            EtideStatus::Ok
        }
        Err(_) => EtideStatus::InvalidArgument,
    }
}

/// Release a suite handle. Null is ignored.
///
/// # Safety
/// `suite` must be null or a pointer previously returned by
/// [`etide_suite_new`] that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn etide_suite_free(suite: *mut EtideSuite) {
    if !suite.is_null() {
        drop(unsafe { Box::from_raw(suite) });
    }
}

/// Number of functions in the suite; 0 for a null handle.
///
/// # Safety
/// `suite` must be null or a live suite handle.
#[no_mangle]
pub unsafe extern "C" fn etide_suite_len(suite: *const EtideSuite) -> usize {
    match unsafe { suite.as_ref() } {
        Some(s) => s.functions.len(),
        None => 0,
    }
}

/// Problem dimension of the suite; 0 for a null handle.
///
/// # Safety
/// `suite` must be null or a live suite handle.
#[no_mangle]
pub unsafe extern "C" fn etide_suite_dimension(suite: *const EtideSuite) -> usize {
    match unsafe { suite.as_ref() } {
        Some(s) => s.functions.first().map_or(0, |f| f.dimension()),
        None => 0,
    }
}

/// Identifier of the `index`-th suite function as a caller-owned string;
/// null on a bad handle or index.
///
/// # Safety
/// `suite` must be null or a live suite handle.
#[no_mangle]
pub unsafe extern "C" fn etide_suite_function_id(
    suite: *const EtideSuite,
    index: usize,
) -> *mut c_char {
    let Some(s) = (unsafe { suite.as_ref() }) else {
        return std::ptr::null_mut();
    };
    match s.functions.get(index) {
        Some(f) => to_c_string(f.id().to_string()),
        None => std::ptr::null_mut(),
    }
}

/// The suite manifest (id, category, seed, dimension, optimum value per
/// function) as a caller-owned JSON string; null on a bad handle.
///
/// # Safety
/// `suite` must be null or a live suite handle.
#[no_mangle]
pub unsafe extern "C" fn etide_suite_manifest_json(suite: *const EtideSuite) -> *mut c_char {
    let Some(s) = (unsafe { suite.as_ref() }) else {
        return std::ptr::null_mut();
    };
    match serde_json::to_string(&manifest(s.seed, &s.functions)) {
        Ok(json) => to_c_string(json),
        Err(_) => std::ptr::null_mut(),
    }
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string returned by an `etide_*` call that has not
/// been freed yet.
#[no_mangle]
pub unsafe extern "C" fn etide_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Evaluate suite function `index` at `x` (length `len`) and write the
/// objective value to `value`.
///
/// # Safety
/// `suite` must be a live suite handle, `x` must point to `len` readable
/// doubles, and `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn etide_evaluate(
    suite: *const EtideSuite,
    index: usize,
    x: *const f64,
    len: usize,
    value: *mut f64,
) -> EtideStatus {
    let Some(s) = (unsafe { suite.as_ref() }) else {
        return EtideStatus::NullPointer;
    };
    if x.is_null() || value.is_null() {
        return EtideStatus::NullPointer;
    }
    let Some(fun) = s.functions.get(index) else {
        return EtideStatus::OutOfRange;
    };
    if len != fun.dimension() {
        return EtideStatus::InvalidArgument;
    }
    let point = unsafe { std::slice::from_raw_parts(x, len) };
    match catch_unwind(AssertUnwindSafe(|| fun.evaluate(point))) {
        Ok(v) => {
            unsafe { *value = v };
            EtideStatus::Ok
        }
        Err(_) => EtideStatus::InternalError,
    }
}

/// Run one seeded optimization of suite function `index` with the named
/// configuration (e.g. `"de-rand-1/eti"`) and store a run handle in `out`.
/// `record_stride` of 0 defaults to `max_fes / 200`.
///
/// # Safety
/// `suite` must be a live suite handle, `algorithm` a valid NUL-terminated
/// string, and `out` writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn etide_optimize(
    suite: *const EtideSuite,
    index: usize,
    algorithm: *const c_char,
    seed: u64,
    max_fes: u64,
    record_stride: u64,
    out: *mut *mut EtideRun,
) -> EtideStatus {
    let Some(s) = (unsafe { suite.as_ref() }) else {
        return EtideStatus::NullPointer;
    };
    if algorithm.is_null() || out.is_null() {
        return EtideStatus::NullPointer;
    }
    let Some(fun) = s.functions.get(index) else {
        return EtideStatus::OutOfRange;
    };
    let Ok(name) = (unsafe { CStr::from_ptr(algorithm) }).to_str() else {
        return EtideStatus::InvalidArgument;
    };
    let Ok(cfg) = named_config(name) else {
        return EtideStatus::UnknownAlgorithm;
    };
    let stride = if record_stride == 0 {
        (max_fes / 200).max(1)
    } else {
        record_stride
    };
    let outcome = catch_unwind(AssertUnwindSafe(|| {
        run_cell(&cfg, fun, seed, 0, max_fes, stride, None)
    }));
    match outcome {
        Ok(Ok(record)) => {
            unsafe { *out = Box::into_raw(Box::new(EtideRun { record })) };
            EtideStatus::Ok
        }
        Ok(Err(_)) => EtideStatus::InvalidArgument,
        Err(_) => EtideStatus::InternalError,
    }
}

/// Release a run handle. Null is ignored.
///
/// # Safety
/// `run` must be null or a pointer previously returned by
/// [`etide_optimize`] that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn etide_run_free(run: *mut EtideRun) {
    if !run.is_null() {
        drop(unsafe { Box::from_raw(run) });
    }
}

/// Floored final error of the run; NaN for a null handle.
///
/// # Safety
/// `run` must be null or a live run handle.
#[no_mangle]
pub unsafe extern "C" fn etide_run_final_error(run: *const EtideRun) -> f64 {
    match unsafe { run.as_ref() } {
        Some(r) => r.record.final_error,
        None => f64::NAN,
    }
}

/// Evaluations consumed by the run; 0 for a null handle.
///
/// # Safety
/// `run` must be null or a live run handle.
#[no_mangle]
pub unsafe extern "C" fn etide_run_fes_used(run: *const EtideRun) -> u64 {
    match unsafe { run.as_ref() } {
        Some(r) => r.record.fes_used,
        None => 0,
    }
}

/// Stabilizing impulse count of the run; 0 for a null handle.
///
/// # Safety
/// `run` must be null or a live run handle.
#[no_mangle]
pub unsafe extern "C" fn etide_run_stabilizing_events(run: *const EtideRun) -> u64 {
    match unsafe { run.as_ref() } {
        Some(r) => r.record.stabilizing_events,
        None => 0,
    }
}

/// Destabilizing impulse count of the run; 0 for a null handle.
///
/// # Safety
/// `run` must be null or a live run handle.
#[no_mangle]
pub unsafe extern "C" fn etide_run_destabilizing_events(run: *const EtideRun) -> u64 {
    match unsafe { run.as_ref() } {
        Some(r) => r.record.destabilizing_events,
        None => 0,
    }
}

/// Number of sampled points on the best-so-far curve; 0 for a null handle.
///
/// # Safety
/// `run` must be null or a live run handle.
#[no_mangle]
pub unsafe extern "C" fn etide_run_curve_len(run: *const EtideRun) -> usize {
    match unsafe { run.as_ref() } {
        Some(r) => r.record.curve.len(),
        None => 0,
    }
}

/// Read curve point `index` into `fes` and `error`.
///
/// # Safety
/// `run` must be a live run handle; `fes` and `error` must be writable.
#[no_mangle]
pub unsafe extern "C" fn etide_run_curve_point(
    run: *const EtideRun,
    index: usize,
    fes: *mut u64,
    error: *mut f64,
) -> EtideStatus {
    let Some(r) = (unsafe { run.as_ref() }) else {
        return EtideStatus::NullPointer;
    };
    if fes.is_null() || error.is_null() {
        return EtideStatus::NullPointer;
    }
    let Some(point) = r.record.curve.get(index) else {
        return EtideStatus::OutOfRange;
    };
    unsafe {
        *fes = point.fes;
        *error = point.error;
    }
    EtideStatus::Ok
}

/// Copy the best point found into `buffer` (length `len`, which must equal
/// the problem dimension).
///
/// # Safety
/// `run` must be a live run handle and `buffer` must point to `len`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn etide_run_best_position(
    run: *const EtideRun,
    buffer: *mut f64,
    len: usize,
) -> EtideStatus {
    let Some(r) = (unsafe { run.as_ref() }) else {
        return EtideStatus::NullPointer;
    };
    if buffer.is_null() {
        return EtideStatus::NullPointer;
    }
    if len != r.record.best_position.len() {
        return EtideStatus::InvalidArgument;
    }
    unsafe {
        std::ptr::copy_nonoverlapping(r.record.best_position.as_ptr(), buffer, len);
    }
    EtideStatus::Ok
}
