//! C ABI over `trustfilter`.
//!
//! Sets and verdicts are opaque heap handles released with their `_free`
//! function. Fallible calls return a [`TfStatus`]; the message for the last
//! failure on the calling thread is available from [`tf_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use trustfilter::baseline::BaselineConfig;
use trustfilter::deviation::{dissimilarity, DeviationFilter};
use trustfilter::metrics::{self, ConfusionCounts};
use trustfilter::{Error, FilterKind, FilterVerdict, RecommendationSet};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TfStatus {
    Ok = 0,
    NullPointer = 1,
    OutOfRange = 2,
    EmptyInput = 3,
    InvalidArgument = 4,
    /// The caller's buffer is shorter than the result; the required length
    /// has been written to `out_len`.
    BufferTooSmall = 5,
    /// Nothing survived filtering, so there is no trust value.
    NoRating = 6,
    Internal = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TfFilterKind {
    Deviation = 0,
    Quartile = 1,
    Chart = 2,
    Iterative = 3,
}

impl From<TfFilterKind> for FilterKind {
    fn from(k: TfFilterKind) -> Self {
        match k {
            TfFilterKind::Deviation => FilterKind::Deviation,
            TfFilterKind::Quartile => FilterKind::Quartile,
            TfFilterKind::Chart => FilterKind::Chart,
            TfFilterKind::Iterative => FilterKind::Iterative,
        }
    }
}

/// Baseline filter parameters. Obtain defaults from [`tf_baseline_params_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TfBaselineParams {
    pub quartile_q: f64,
    pub chart_k: f64,
    pub iterative_s: f64,
    pub iterative_max_rounds: usize,
}

impl From<TfBaselineParams> for BaselineConfig {
    fn from(p: TfBaselineParams) -> Self {
        BaselineConfig {
            quartile_q: p.quartile_q,
            chart_k: p.chart_k,
            iterative_s: p.iterative_s,
            iterative_max_rounds: p.iterative_max_rounds,
        }
    }
}

/// Opaque recommendation set.
pub struct TfRecommendationSet(RecommendationSet);

/// Opaque filter verdict.
pub struct TfVerdict(FilterVerdict);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: TfStatus, msg: &str) -> TfStatus {
    set_last_error(msg);
    status
}

fn status_of(e: &Error) -> TfStatus {
    let status = match e {
        Error::EmptyInput => TfStatus::EmptyInput,
        Error::OutOfRange { .. } | Error::ZeroFrequency => TfStatus::OutOfRange,
        Error::LabelMismatch { .. } => TfStatus::Internal,
        _ => TfStatus::InvalidArgument,
    };
    fail(status, &e.to_string())
}

/// Runs `f`, turning a panic into `TfStatus::Internal`.
fn guard(f: impl FnOnce() -> TfStatus) -> TfStatus {
    catch_unwind(AssertUnwindSafe(f))
        .unwrap_or_else(|_| fail(TfStatus::Internal, "panic in trustfilter"))
}

/// Message for the last failed call on this thread; empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn tf_baseline_params_default() -> TfBaselineParams {
    let d = BaselineConfig::default();
    TfBaselineParams {
        quartile_q: d.quartile_q,
        chart_k: d.chart_k,
        iterative_s: d.iterative_s,
        iterative_max_rounds: d.iterative_max_rounds,
    }
}

/// Copies `len` values in `[0, 1]` into a new set stored in `*out`.
///
/// # Safety
/// `values` must point to `len` readable doubles (it may be null when `len`
/// is 0) and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tf_recommendation_set_new(
    values: *const f64,
    len: usize,
    out: *mut *mut TfRecommendationSet,
) -> TfStatus {
    guard(|| {
        if out.is_null() || (values.is_null() && len > 0) {
            return fail(TfStatus::NullPointer, "null pointer argument");
        }
        let slice = if len == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(values, len)
        };
        match RecommendationSet::from_values(slice) {
            Ok(set) => {
                *out = Box::into_raw(Box::new(TfRecommendationSet(set)));
                TfStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Number of values in the set; 0 for null.
///
/// # Safety
/// `set` must be null or a live handle from [`tf_recommendation_set_new`].
#[no_mangle]
pub unsafe extern "C" fn tf_recommendation_set_len(set: *const TfRecommendationSet) -> usize {
    set.as_ref().map_or(0, |s| s.0.len())
}

/// # Safety
/// `set` must be null or a handle from [`tf_recommendation_set_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tf_recommendation_set_free(set: *mut TfRecommendationSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

unsafe fn store_verdict(
    result: trustfilter::Result<FilterVerdict>,
    out: *mut *mut TfVerdict,
) -> TfStatus {
    match result {
        Ok(v) => {
            *out = Box::into_raw(Box::new(TfVerdict(v)));
            TfStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Runs a filter over `set`. `params` may be null for the defaults; the
/// deviation filter ignores it.
///
/// # Safety
/// `set` must be a live set handle, `params` null or valid, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn tf_filter_run(
    set: *const TfRecommendationSet,
    kind: TfFilterKind,
    params: *const TfBaselineParams,
    out: *mut *mut TfVerdict,
) -> TfStatus {
    guard(|| {
        let Some(set) = set.as_ref() else {
            return fail(TfStatus::NullPointer, "null recommendation set");
        };
        if out.is_null() {
            return fail(TfStatus::NullPointer, "null output pointer");
        }
        let config = params
            .as_ref()
            .map_or_else(BaselineConfig::default, |p| (*p).into());
        store_verdict(FilterKind::from(kind).apply(&set.0, &config), out)
    })
}

/// Deviation filter measured from a fixed `reference` instead of the median.
///
/// # Safety
/// As [`tf_filter_run`].
#[no_mangle]
pub unsafe extern "C" fn tf_deviation_run_with_reference(
    set: *const TfRecommendationSet,
    reference: f64,
    out: *mut *mut TfVerdict,
) -> TfStatus {
    guard(|| {
        let Some(set) = set.as_ref() else {
            return fail(TfStatus::NullPointer, "null recommendation set");
        };
        if out.is_null() {
            return fail(TfStatus::NullPointer, "null output pointer");
        }
        store_verdict(
            DeviationFilter::with_reference(reference).filter(&set.0),
            out,
        )
    })
}

/// Mean of the surviving values, or `NoRating` when none survived.
///
/// # Safety
/// `verdict` must be a live verdict handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn tf_verdict_trust(verdict: *const TfVerdict, out: *mut f64) -> TfStatus {
    let (Some(v), false) = (verdict.as_ref(), out.is_null()) else {
        return fail(TfStatus::NullPointer, "null pointer argument");
    };
    match v.0.trust() {
        Some(t) => {
            *out = t;
            TfStatus::Ok
        }
        None => fail(TfStatus::NoRating, "no recommendation survived filtering"),
    }
}

/// # Safety
/// `verdict` must be null or a live verdict handle.
#[no_mangle]
pub unsafe extern "C" fn tf_verdict_surviving_count(verdict: *const TfVerdict) -> usize {
    verdict.as_ref().map_or(0, |v| v.0.surviving().len())
}

/// # Safety
/// `verdict` must be null or a live verdict handle.
#[no_mangle]
pub unsafe extern "C" fn tf_verdict_removed_count(verdict: *const TfVerdict) -> usize {
    verdict.as_ref().map_or(0, |v| v.0.removed().len())
}

unsafe fn copy_out<T: Copy>(src: &[T], buf: *mut T, cap: usize, out_len: *mut usize) -> TfStatus {
    if out_len.is_null() || (buf.is_null() && cap > 0) {
        return fail(TfStatus::NullPointer, "null pointer argument");
    }
    *out_len = src.len();
    if src.len() > cap {
        return fail(TfStatus::BufferTooSmall, "buffer too small");
    }
    if !src.is_empty() {
        ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    }
    TfStatus::Ok
}

/// Writes the dishonest class values (ascending) into `buf`. Always writes
/// the count to `*out_len`. Baseline verdicts have no classes.
///
/// # Safety
/// `verdict` must be a live verdict handle, `buf` must hold `cap` doubles
/// (null allowed when `cap` is 0) and `out_len` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tf_verdict_dishonest_classes(
    verdict: *const TfVerdict,
    buf: *mut f64,
    cap: usize,
    out_len: *mut usize,
) -> TfStatus {
    let Some(v) = verdict.as_ref() else {
        return fail(TfStatus::NullPointer, "null verdict");
    };
    let classes: Vec<f64> = v.0.dishonest_classes().iter().map(|c| c.value()).collect();
    copy_out(&classes, buf, cap, out_len)
}

/// Writes 1 for each removed input position and 0 otherwise, in input order.
///
/// # Safety
/// As [`tf_verdict_dishonest_classes`], with a byte buffer.
#[no_mangle]
pub unsafe extern "C" fn tf_verdict_removed_mask(
    verdict: *const TfVerdict,
    buf: *mut u8,
    cap: usize,
    out_len: *mut usize,
) -> TfStatus {
    let Some(v) = verdict.as_ref() else {
        return fail(TfStatus::NullPointer, "null verdict");
    };
    let mask: Vec<u8> = v.0.removed_mask().iter().map(|&b| u8::from(b)).collect();
    copy_out(&mask, buf, cap, out_len)
}

/// # Safety
/// `verdict` must be null or a verdict handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tf_verdict_free(verdict: *mut TfVerdict) {
    if !verdict.is_null() {
        drop(Box::from_raw(verdict));
    }
}

/// Squared distance of `class_value` from `reference` divided by `frequency`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tf_dissimilarity(
    class_value: f64,
    frequency: usize,
    reference: f64,
    out: *mut f64,
) -> TfStatus {
    if out.is_null() {
        return fail(TfStatus::NullPointer, "null output pointer");
    }
    match dissimilarity(class_value, frequency, reference) {
        Ok(df) => {
            *out = df;
            TfStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Matthews correlation coefficient with dishonest as the positive class.
#[no_mangle]
pub extern "C" fn tf_mcc(tp: u64, tn: u64, fp: u64, fn_: u64) -> f64 {
    metrics::mcc(&ConfusionCounts::new(tp, tn, fp, fn_))
}

#[no_mangle]
pub extern "C" fn tf_fpr(tp: u64, tn: u64, fp: u64, fn_: u64) -> f64 {
    metrics::fpr(&ConfusionCounts::new(tp, tn, fp, fn_))
}

#[no_mangle]
pub extern "C" fn tf_fnr(tp: u64, tn: u64, fp: u64, fn_: u64) -> f64 {
    metrics::fnr(&ConfusionCounts::new(tp, tn, fp, fn_))
}
