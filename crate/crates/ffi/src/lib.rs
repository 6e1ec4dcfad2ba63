//! C ABI for the `semiscale` library.
//!
//! Series are passed as opaque `SemiscaleSeries` handles created by this
//! library and released with `semiscale_series_free`. Every fallible call
//! returns a `SemiscaleStatus`; on failure `semiscale_last_error` describes
//! the most recent error on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use semiscale::hurst::HurstMethod;
use semiscale::pipeline::{self, HurstChoice, ScaleSettings};
use semiscale::sim::{self, SfbmParams};
use semiscale::{scale, Error, SamplingGrid, TimeSeries};

/// Result codes. Values 2 to 4 match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SemiscaleStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Degenerate = 3,
    Io = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SemiscaleHurstMethod {
    /// Order-1 ratio, switching to order 2 when the estimate is at least 0.75.
    Auto = 0,
    Ratio1 = 1,
    Ratio2 = 2,
    QuadraticVariation = 3,
}

/// Scale-stage summary from `semiscale_estimate_scale`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SemiscaleScaleResult {
    pub lambda0: f64,
    pub lambda_star: f64,
    pub mu_bar_star: f64,
    pub h_minus_hprime: f64,
    pub j_used: usize,
    /// Non-zero when the refinement objective was flat.
    pub degenerate: i32,
}

/// Opaque time series handle.
pub struct SemiscaleSeries(TimeSeries);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> SemiscaleStatus {
    match e.exit_code() {
        3 => SemiscaleStatus::Degenerate,
        4 => SemiscaleStatus::Io,
        _ => SemiscaleStatus::Domain,
    }
}

fn guard(f: impl FnOnce() -> Result<(), SemiscaleStatus>) -> SemiscaleStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SemiscaleStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            SemiscaleStatus::Panic
        }
    }
}

fn fail(e: Error) -> SemiscaleStatus {
    set_error(&e.to_string());
    status_of(&e)
}

fn null(what: &str) -> SemiscaleStatus {
    set_error(&format!("null pointer: {what}"));
    SemiscaleStatus::NullPointer
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], SemiscaleStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn series_ref<'a>(s: *const SemiscaleSeries) -> Result<&'a TimeSeries, SemiscaleStatus> {
    s.as_ref().map(|s| &s.0).ok_or_else(|| null("series"))
}

unsafe fn emit(out: *mut *mut SemiscaleSeries, x: TimeSeries) {
    *out = Box::into_raw(Box::new(SemiscaleSeries(x)));
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn semiscale_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Copy `len` samples into a new series. Times must be strictly increasing.
///
/// # Safety
/// `times` and `values` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn semiscale_series_new(
    times: *const f64,
    values: *const f64,
    len: usize,
    out: *mut *mut SemiscaleSeries,
) -> SemiscaleStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let t = slice(times, len, "times")?.to_vec();
        let v = slice(values, len, "values")?.to_vec();
        let x = TimeSeries::new(t, v).map_err(fail)?;
        emit(out, x);
        Ok(())
    })
}

/// Simulate simple fBm on the uniform grid `1, 1 + h, …, end` with `steps` steps.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn semiscale_simulate_sfbm(
    lambda: f64,
    hurst: f64,
    hurst_prime: f64,
    steps: usize,
    end: f64,
    seed: u64,
    out: *mut *mut SemiscaleSeries,
) -> SemiscaleStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let params = SfbmParams::new(lambda, hurst, hurst_prime).map_err(fail)?;
        let x = sim::simulate_sfbm(&params, &SamplingGrid::Uniform { end, steps }, seed).map_err(fail)?;
        emit(out, x);
        Ok(())
    })
}

/// Number of samples; 0 for a null handle.
///
/// # Safety
/// `series` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn semiscale_series_len(series: *const SemiscaleSeries) -> usize {
    series.as_ref().map_or(0, |s| s.0.len())
}

/// Copy up to `capacity` times and values out; either destination may be null.
///
/// # Safety
/// `series` must be a live handle; non-null destinations must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn semiscale_series_copy(
    series: *const SemiscaleSeries,
    times_out: *mut f64,
    values_out: *mut f64,
    capacity: usize,
) -> SemiscaleStatus {
    guard(|| {
        let x = series_ref(series)?;
        let n = x.len().min(capacity);
        if !times_out.is_null() {
            ptr::copy_nonoverlapping(x.times().as_ptr(), times_out, n);
        }
        if !values_out.is_null() {
            ptr::copy_nonoverlapping(x.values().as_ptr(), values_out, n);
        }
        Ok(())
    })
}

/// Release a handle. Null is ignored.
///
/// # Safety
/// `series` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn semiscale_series_free(series: *mut SemiscaleSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// Run the scale stage with default settings.
///
/// # Safety
/// `series` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn semiscale_estimate_scale(
    series: *const SemiscaleSeries,
    out: *mut SemiscaleScaleResult,
) -> SemiscaleStatus {
    guard(|| {
        let x = series_ref(series)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let (report, _) = pipeline::estimate_scale(x, &ScaleSettings::default()).map_err(fail)?;
        let e = report.estimate;
        *out = SemiscaleScaleResult {
            lambda0: e.lambda0,
            lambda_star: e.lambda_star,
            mu_bar_star: e.mu_bar_star,
            h_minus_hprime: e.h_minus_hprime,
            j_used: e.j_used,
            degenerate: e.refinement.degenerate as i32,
        };
        Ok(())
    })
}

/// Divide samples in `[λ^{k−1}, λ^k)` by `λ^{(k−1)·h_gap}` into a new series.
///
/// # Safety
/// `series` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn semiscale_rescale_to_fbm(
    series: *const SemiscaleSeries,
    lambda_star: f64,
    h_gap: f64,
    out: *mut *mut SemiscaleSeries,
) -> SemiscaleStatus {
    guard(|| {
        let x = series_ref(series)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let y = scale::rescale_to_fbm(x, lambda_star, h_gap).map_err(fail)?;
        emit(out, y);
        Ok(())
    })
}

/// Hurst index of `len` equally spaced samples.
///
/// # Safety
/// `values` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn semiscale_estimate_hurst(
    values: *const f64,
    len: usize,
    method: SemiscaleHurstMethod,
    k_max: usize,
    out: *mut f64,
) -> SemiscaleStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let v = slice(values, len, "values")?;
        let times = (0..v.len()).map(|i| 1.0 + i as f64).collect();
        let x = TimeSeries::new(times, v.to_vec()).map_err(fail)?;
        let choice = match method {
            SemiscaleHurstMethod::Auto => HurstChoice::Auto,
            SemiscaleHurstMethod::Ratio1 => HurstChoice::Fixed(HurstMethod::RatioOrder1),
            SemiscaleHurstMethod::Ratio2 => HurstChoice::Fixed(HurstMethod::RatioOrder2),
            SemiscaleHurstMethod::QuadraticVariation => HurstChoice::Fixed(HurstMethod::QuadraticVariation),
        };
        let r = pipeline::estimate_hurst(&x, choice, k_max, None).map_err(fail)?;
        *out = r.selected.combined;
        Ok(())
    })
}
