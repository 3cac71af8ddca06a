//! C bindings for `wbrier`.
//!
//! Datasets and weights are opaque handles created by `wb_*_new` /
//! `wb_weight_*` and released with the matching `*_free`. Every fallible
//! function returns a [`WbStatus`] and writes its result through an out
//! pointer; on failure `wb_last_error()` describes the problem. Panics are
//! caught at the boundary and reported as `WB_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use wbrier::decompose::{decompose_with, ipa, scaled_weighted_brier};
use wbrier::inference::{asymptotic_ci_bsw, bootstrap};
use wbrier::metrics::{
    cutoff_from_costs, loss_at, net_benefit_opt_in, net_benefit_opt_out, spiegelhalter_z,
    spiegelhalter_z_weighted, weighted_brier, weighted_brier_calibrated,
};
use wbrier::rocutil::{auc, h_measure};
use wbrier::{
    BinningSpec, BootstrapConfig, CiRecord, Error, McbEstimator, ResamplingUnit, ValidationSet, WeightSpec,
};

/// Predicted risks with their observed outcomes.
pub struct WbDataset(ValidationSet);

/// A weight distribution over cutoffs.
pub struct WbWeight(WeightSpec);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WbStatus {
    Ok = 0,
    NullPointer = 1,
    /// An argument is out of range or unparsable.
    InvalidArgument = 2,
    InvalidData = 3,
    /// The quantity is undefined for this data, e.g. one outcome class.
    Degenerate = 4,
    Bootstrap = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WbDecomposition {
    pub mcb_w: f64,
    pub dsc_w: f64,
    pub unc_w: f64,
    pub bs_w: f64,
    /// `bs_w - (mcb_w - dsc_w + unc_w)`
    pub residual: f64,
    pub bins: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WbInterval {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
}

impl From<CiRecord> for WbInterval {
    fn from(ci: CiRecord) -> Self {
        WbInterval {
            estimate: ci.estimate,
            lower: ci.lower,
            upper: ci.upper,
            level: ci.level,
        }
    }
}

struct Failure(WbStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Degenerate(_) | Error::SingleClass | Error::EmptyBin { .. } => WbStatus::Degenerate,
            Error::InvalidData(_) | Error::Alignment(_) => WbStatus::InvalidData,
            Error::Bootstrap(_) => WbStatus::Bootstrap,
            _ => WbStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = text);
}

/// Runs `body`, translating errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> WbStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_last_error("");
            WbStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {message}"));
            WbStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(WbStatus::NullPointer, format!("{what} is NULL"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice<'a, T>(p: *const T, n: usize, what: &str) -> Result<&'a [T], Failure> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

/// Boxes `value` into a new handle; `out` is checked first so nothing leaks.
unsafe fn put_handle<T>(out: *mut *mut T, value: impl FnOnce() -> Result<T, Failure>) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(Box::into_raw(Box::new(value()?)));
    Ok(())
}

/// Evaluates a scalar statistic of one dataset.
unsafe fn scalar(
    data: *const WbDataset,
    out: *mut f64,
    f: impl FnOnce(&ValidationSet) -> Result<f64, Error>,
) -> WbStatus {
    guard(|| {
        let data = deref(data, "dataset")?;
        put(out, f(&data.0)?)
    })
}

/// Evaluates a scalar statistic of a dataset under a weight.
unsafe fn weighted(
    data: *const WbDataset,
    weight: *const WbWeight,
    out: *mut f64,
    f: impl FnOnce(&ValidationSet, &WeightSpec) -> Result<f64, Error>,
) -> WbStatus {
    guard(|| {
        let data = deref(data, "dataset")?;
        let weight = deref(weight, "weight")?;
        put(out, f(&data.0, &weight.0)?)
    })
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next `wb_*` call on the same thread.
#[no_mangle]
pub extern "C" fn wb_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn wb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies `n` risks in [0, 1] and outcomes (0 or 1) into a new dataset.
///
/// # Safety
/// `risks` and `outcomes` must point to `n` readable elements.
#[no_mangle]
pub unsafe extern "C" fn wb_dataset_new(
    risks: *const f64,
    outcomes: *const u8,
    n: usize,
    out: *mut *mut WbDataset,
) -> WbStatus {
    guard(|| {
        let risks = slice(risks, n, "risks")?.to_vec();
        let outcomes = slice(outcomes, n, "outcomes")?;
        put_handle(out, || Ok(WbDataset(ValidationSet::from_binary(risks, outcomes)?)))
    })
}

/// Attaches one cluster id per row, enabling cluster bootstrap.
///
/// # Safety
/// `data` must be a live dataset handle and `ids` must point to `n` elements.
#[no_mangle]
pub unsafe extern "C" fn wb_dataset_set_clusters(data: *mut WbDataset, ids: *const u32, n: usize) -> WbStatus {
    guard(|| {
        let data = data.as_mut().ok_or_else(|| null("dataset"))?;
        let ids = slice(ids, n, "cluster ids")?;
        data.0 = data.0.clone().with_clusters(ids.iter().copied())?;
        Ok(())
    })
}

/// # Safety
/// `data` must be a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn wb_dataset_len(data: *const WbDataset, out: *mut usize) -> WbStatus {
    guard(|| put(out, deref(data, "dataset")?.0.len()))
}

/// # Safety
/// `data` must be NULL or a handle from `wb_dataset_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wb_dataset_free(data: *mut WbDataset) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

unsafe fn new_weight(out: *mut *mut WbWeight, spec: Result<WeightSpec, Error>) -> WbStatus {
    guard(|| put_handle(out, || Ok(WbWeight(spec?))))
}

/// Parses `uniform`, `beta:a,b`, `point:c` or `mix:w1*spec1+w2*spec2…`.
///
/// # Safety
/// `spec` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn wb_weight_parse(spec: *const c_char, out: *mut *mut WbWeight) -> WbStatus {
    guard(|| {
        if spec.is_null() {
            return Err(null("weight specification"));
        }
        let text = CStr::from_ptr(spec)
            .to_str()
            .map_err(|_| Failure(WbStatus::InvalidArgument, "weight specification is not UTF-8".into()))?;
        put_handle(out, || Ok(WbWeight(text.parse()?)))
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wb_weight_uniform(out: *mut *mut WbWeight) -> WbStatus {
    new_weight(out, Ok(WeightSpec::uniform()))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wb_weight_beta(a: f64, b: f64, out: *mut *mut WbWeight) -> WbStatus {
    new_weight(out, WeightSpec::beta(a, b))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wb_weight_point_mass(c: f64, out: *mut *mut WbWeight) -> WbStatus {
    new_weight(out, WeightSpec::point_mass(c))
}

/// # Safety
/// `weight` must be NULL or a live weight handle.
#[no_mangle]
pub unsafe extern "C" fn wb_weight_free(weight: *mut WbWeight) {
    if !weight.is_null() {
        drop(Box::from_raw(weight));
    }
}

/// `F_w(r)`.
///
/// # Safety
/// `weight` must be a live weight handle.
#[no_mangle]
pub unsafe extern "C" fn wb_weight_cdf(weight: *const WbWeight, r: f64, out: *mut f64) -> WbStatus {
    guard(|| put(out, deref(weight, "weight")?.0.cdf(r)?))
}

/// `m_w(r)`, the integral of `c w(c)` over `[0, r]`.
///
/// # Safety
/// `weight` must be a live weight handle.
#[no_mangle]
pub unsafe extern "C" fn wb_weight_inc_moment(weight: *const WbWeight, r: f64, out: *mut f64) -> WbStatus {
    guard(|| put(out, deref(weight, "weight")?.0.inc_moment(r)?))
}

/// # Safety
/// `weight` must be a live weight handle.
#[no_mangle]
pub unsafe extern "C" fn wb_weight_mean(weight: *const WbWeight, out: *mut f64) -> WbStatus {
    guard(|| put(out, deref(weight, "weight")?.0.mean()))
}

/// Cutoff `C / (C + B)` from the four outcome costs.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wb_cutoff_from_costs(c_fp: f64, c_tn: f64, c_fn: f64, c_tp: f64, out: *mut f64) -> WbStatus {
    guard(|| put(out, cutoff_from_costs(c_fp, c_tn, c_fn, c_tp)?))
}

/// # Safety
/// `data` must be a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn wb_loss_at(data: *const WbDataset, c: f64, out: *mut f64) -> WbStatus {
    scalar(data, out, |d| loss_at(d, c))
}

/// # Safety
/// `data` must be a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn wb_net_benefit_opt_in(data: *const WbDataset, c: f64, out: *mut f64) -> WbStatus {
    scalar(data, out, |d| net_benefit_opt_in(d, c))
}

/// # Safety
/// `data` must be a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn wb_net_benefit_opt_out(data: *const WbDataset, c: f64, out: *mut f64) -> WbStatus {
    scalar(data, out, |d| net_benefit_opt_out(d, c))
}

/// # Safety
/// `data` must be a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn wb_auc(data: *const WbDataset, out: *mut f64) -> WbStatus {
    scalar(data, out, auc)
}

/// # Safety
/// `data` must be a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn wb_ipa(data: *const WbDataset, out: *mut f64) -> WbStatus {
    scalar(data, out, ipa)
}

/// # Safety
/// `data` must be a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn wb_spiegelhalter_z(data: *const WbDataset, out: *mut f64) -> WbStatus {
    scalar(data, out, spiegelhalter_z)
}

/// # Safety
/// `data` and `weight` must be live handles.
#[no_mangle]
pub unsafe extern "C" fn wb_weighted_brier(data: *const WbDataset, weight: *const WbWeight, out: *mut f64) -> WbStatus {
    weighted(data, weight, out, |d, w| Ok(weighted_brier(d, w)))
}

/// Weighted Brier score under the assumption that the model is calibrated.
///
/// # Safety
/// `data` and `weight` must be live handles.
#[no_mangle]
pub unsafe extern "C" fn wb_weighted_brier_calibrated(
    data: *const WbDataset,
    weight: *const WbWeight,
    out: *mut f64,
) -> WbStatus {
    weighted(data, weight, out, |d, w| Ok(weighted_brier_calibrated(d, w)))
}

/// # Safety
/// `data` and `weight` must be live handles.
#[no_mangle]
pub unsafe extern "C" fn wb_scaled_weighted_brier(
    data: *const WbDataset,
    weight: *const WbWeight,
    out: *mut f64,
) -> WbStatus {
    weighted(data, weight, out, scaled_weighted_brier)
}

/// # Safety
/// `data` and `weight` must be live handles.
#[no_mangle]
pub unsafe extern "C" fn wb_h_measure(data: *const WbDataset, weight: *const WbWeight, out: *mut f64) -> WbStatus {
    weighted(data, weight, out, |d, w| h_measure(d, w).map(|h| h.h))
}

/// # Safety
/// `data` and `weight` must be live handles.
#[no_mangle]
pub unsafe extern "C" fn wb_spiegelhalter_z_weighted(
    data: *const WbDataset,
    weight: *const WbWeight,
    out: *mut f64,
) -> WbStatus {
    weighted(data, weight, out, spiegelhalter_z_weighted)
}

/// `bins = 0` groups by distinct risk values; otherwise `bins` quantile
/// groups. `per_sample` selects the per-observation MCB estimator.
///
/// # Safety
/// `data` and `weight` must be live handles.
#[no_mangle]
pub unsafe extern "C" fn wb_decompose(
    data: *const WbDataset,
    weight: *const WbWeight,
    bins: usize,
    per_sample: bool,
    out: *mut WbDecomposition,
) -> WbStatus {
    guard(|| {
        let data = deref(data, "dataset")?;
        let weight = deref(weight, "weight")?;
        let spec = match bins {
            0 => BinningSpec::UniqueValues,
            k => BinningSpec::Quantile(k),
        };
        let estimator = if per_sample {
            McbEstimator::PerSample
        } else {
            McbEstimator::BinMean
        };
        let d = decompose_with(&data.0, &weight.0, &spec, estimator)?;
        put(
            out,
            WbDecomposition {
                mcb_w: d.mcb_w,
                dsc_w: d.dsc_w,
                unc_w: d.unc_w,
                bs_w: d.bs_w,
                residual: d.residual,
                bins: d.bins.len(),
            },
        )
    })
}

/// Normal-approximation interval for the weighted Brier score.
///
/// # Safety
/// `data` and `weight` must be live handles.
#[no_mangle]
pub unsafe extern "C" fn wb_asymptotic_ci_bsw(
    data: *const WbDataset,
    weight: *const WbWeight,
    level: f64,
    out: *mut WbInterval,
) -> WbStatus {
    guard(|| {
        let data = deref(data, "dataset")?;
        let weight = deref(weight, "weight")?;
        put(out, asymptotic_ci_bsw(&data.0, &weight.0, level)?.into())
    })
}

/// Percentile bootstrap interval for the weighted Brier score. With
/// `by_cluster` whole clusters are resampled.
///
/// # Safety
/// `data` and `weight` must be live handles.
#[no_mangle]
pub unsafe extern "C" fn wb_bootstrap_bsw(
    data: *const WbDataset,
    weight: *const WbWeight,
    replicates: usize,
    seed: u64,
    level: f64,
    by_cluster: bool,
    out: *mut WbInterval,
) -> WbStatus {
    guard(|| {
        let data = deref(data, "dataset")?;
        let weight = deref(weight, "weight")?;
        let cfg = BootstrapConfig {
            replicates,
            seed,
            level,
            unit: if by_cluster {
                ResamplingUnit::Cluster
            } else {
                ResamplingUnit::Observation
            },
        };
        let ci = bootstrap(&data.0, |d| Ok(weighted_brier(d, &weight.0)), &cfg)?;
        put(out, ci.into())
    })
}
