//! C ABI bindings: opaque handles over datasets and fitted models, status
//! codes for every fallible call, and a thread-local last-error message.
//!
//! The generated header lives at `include/lgdkit.h`; `build.rs` regenerates
//! it via cbindgen. All returned strings are heap-allocated by this library
//! and must be released with [`lgd_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::ptr;

use lgdkit::baselines::{self, FittedModel, ForestParams, ModelSpec};
use lgdkit::dataset::{apply_filters, load_dataset, CsvSchema, Dataset, FilterConfig};
use lgdkit::entropy::{self, Condition};
use lgdkit::evaluate;
use lgdkit::infomodel::InfoModelConfig;
use lgdkit::synthgen;

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LgdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Utf8 = 4,
    Internal = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = CString::new(message.into().replace('\0', " "))
        .unwrap_or_else(|_| CString::new("error").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(text));
}

fn fail(status: LgdStatus, message: impl Into<String>) -> LgdStatus {
    set_error(message);
    status
}

/// Opaque dataset handle.
pub struct LgdDataset {
    inner: Dataset,
}

/// Opaque fitted-model handle.
pub struct LgdModel {
    inner: FittedModel,
}

unsafe fn str_arg<'a>(ptr: *const c_char) -> Result<&'a str, LgdStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(LgdStatus::NullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        LgdStatus::Utf8
    })
}

fn spec_for(family: &str, seed: u64) -> Result<ModelSpec, LgdStatus> {
    match family.trim().to_ascii_lowercase().as_str() {
        "industry" | "industry_average" => Ok(ModelSpec::IndustryAverage),
        "size" | "size_heuristic" => Ok(ModelSpec::SizeHeuristic),
        "linear" => Ok(ModelSpec::Linear),
        "forest" => Ok(ModelSpec::Forest(ForestParams { seed, ..Default::default() })),
        "info" | "info_model" | "infomodel" => {
            Ok(ModelSpec::Info(InfoModelConfig { seed, ..Default::default() }))
        }
        other => {
            set_error(format!(
                "unknown model family `{other}` (expected industry, size, linear, forest, or info)"
            ));
            Err(LgdStatus::InvalidArgument)
        }
    }
}

/// Copy the message of the last failing call on this thread into `buffer`
/// (NUL-terminated, truncated to `capacity`). Returns the full message
/// length in bytes, excluding the terminator; 0 when no error is recorded.
#[no_mangle]
pub unsafe extern "C" fn lgd_last_error_message(
    buffer: *mut c_char,
    capacity: usize,
) -> usize {
    LAST_ERROR.with(|slot| {
        let guard = slot.borrow();
        let Some(message) = guard.as_ref() else {
            return 0;
        };
        let bytes = message.as_bytes();
        if !buffer.is_null() && capacity > 0 {
            let n = bytes.len().min(capacity - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buffer, n);
            *buffer.add(n) = 0;
        }
        bytes.len()
    })
}

/// Release a string allocated by this library.
///
/// # Safety
/// `s` must have been returned by an `lgd_*` function and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lgd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Generate a synthetic mixture dataset with the default component shapes.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lgd_dataset_generate(
    n: usize,
    pi_proxy: f64,
    seed: u64,
    out: *mut *mut LgdDataset,
) -> LgdStatus {
    if out.is_null() {
        return fail(LgdStatus::NullPointer, "null output pointer");
    }
    let mut config = synthgen::default_paper_config();
    config.n = n;
    config.pi_proxy = pi_proxy;
    config.seed = seed;
    match synthgen::generate(&config) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(LgdDataset { inner }));
            LgdStatus::Ok
        }
        Err(e) => fail(LgdStatus::InvalidArgument, e.to_string()),
    }
}

/// Load a dataset CSV (canonical schema) and apply the default
/// sample-selection filters.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lgd_dataset_load_csv(
    path: *const c_char,
    out: *mut *mut LgdDataset,
) -> LgdStatus {
    if out.is_null() {
        return fail(LgdStatus::NullPointer, "null output pointer");
    }
    let path = match str_arg(path) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let records = match load_dataset(Path::new(path), &CsvSchema::default()) {
        Ok(r) => r,
        Err(e @ lgdkit::dataset::DataError::Io { .. })
        | Err(e @ lgdkit::dataset::DataError::Csv { .. }) => {
            return fail(LgdStatus::Io, e.to_string())
        }
        Err(e) => return fail(LgdStatus::InvalidArgument, e.to_string()),
    };
    match apply_filters(records, &FilterConfig::default()) {
        Ok((inner, _)) => {
            *out = Box::into_raw(Box::new(LgdDataset { inner }));
            LgdStatus::Ok
        }
        Err(e) => fail(LgdStatus::InvalidArgument, e.to_string()),
    }
}

/// Number of records.
///
/// # Safety
/// `dataset` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lgd_dataset_len(
    dataset: *const LgdDataset,
    out: *mut usize,
) -> LgdStatus {
    if dataset.is_null() || out.is_null() {
        return fail(LgdStatus::NullPointer, "null argument");
    }
    *out = (*dataset).inner.len();
    LgdStatus::Ok
}

/// Realized proxy share of the dataset.
///
/// # Safety
/// `dataset` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lgd_dataset_mixture_proportion(
    dataset: *const LgdDataset,
    out: *mut f64,
) -> LgdStatus {
    if dataset.is_null() || out.is_null() {
        return fail(LgdStatus::NullPointer, "null argument");
    }
    *out = (*dataset).inner.mixture_proportion;
    LgdStatus::Ok
}

/// Copy the label vector into `out` (capacity `len`, must equal the dataset
/// length).
///
/// # Safety
/// `dataset` must be a live handle; `out` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn lgd_dataset_labels(
    dataset: *const LgdDataset,
    out: *mut f64,
    len: usize,
) -> LgdStatus {
    if dataset.is_null() || out.is_null() {
        return fail(LgdStatus::NullPointer, "null argument");
    }
    let labels = &(*dataset).inner.labels;
    if len != labels.len() {
        return fail(
            LgdStatus::InvalidArgument,
            format!("buffer holds {len} values, dataset has {}", labels.len()),
        );
    }
    ptr::copy_nonoverlapping(labels.as_ptr(), out, labels.len());
    LgdStatus::Ok
}

/// Release a dataset handle.
///
/// # Safety
/// `dataset` must have come from this library and not yet be freed.
#[no_mangle]
pub unsafe extern "C" fn lgd_dataset_free(dataset: *mut LgdDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Fit a model family (`industry`, `size`, `linear`, `forest`, `info`).
///
/// # Safety
/// `dataset` must be live; `family` NUL-terminated; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn lgd_model_fit(
    dataset: *const LgdDataset,
    family: *const c_char,
    seed: u64,
    out: *mut *mut LgdModel,
) -> LgdStatus {
    if dataset.is_null() || out.is_null() {
        return fail(LgdStatus::NullPointer, "null argument");
    }
    let family = match str_arg(family) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let spec = match spec_for(family, seed) {
        Ok(s) => s,
        Err(status) => return status,
    };
    match baselines::fit(&spec, &(*dataset).inner) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(LgdModel { inner }));
            LgdStatus::Ok
        }
        Err(e) => fail(LgdStatus::InvalidArgument, e.to_string()),
    }
}

/// Predict every dataset row into `out` (capacity `len`, must equal the
/// dataset length). Predictions lie in [0,1].
///
/// # Safety
/// Handles must be live; `out` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn lgd_model_predict(
    model: *const LgdModel,
    dataset: *const LgdDataset,
    out: *mut f64,
    len: usize,
) -> LgdStatus {
    if model.is_null() || dataset.is_null() || out.is_null() {
        return fail(LgdStatus::NullPointer, "null argument");
    }
    let data = &(*dataset).inner;
    if len != data.len() {
        return fail(
            LgdStatus::InvalidArgument,
            format!("buffer holds {len} values, dataset has {}", data.len()),
        );
    }
    for (i, features) in data.features.iter().enumerate() {
        *out.add(i) = (*model).inner.predict(features);
    }
    LgdStatus::Ok
}

/// Serialize a fitted model as JSON; release with [`lgd_string_free`].
///
/// # Safety
/// `model` must be live; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn lgd_model_to_json(
    model: *const LgdModel,
    out: *mut *mut c_char,
) -> LgdStatus {
    if model.is_null() || out.is_null() {
        return fail(LgdStatus::NullPointer, "null argument");
    }
    let json = match serde_json::to_string(&(*model).inner) {
        Ok(j) => j,
        Err(e) => return fail(LgdStatus::Internal, e.to_string()),
    };
    match CString::new(json) {
        Ok(c) => {
            *out = c.into_raw();
            LgdStatus::Ok
        }
        Err(e) => fail(LgdStatus::Internal, e.to_string()),
    }
}

/// Restore a fitted model from JSON produced by [`lgd_model_to_json`].
///
/// # Safety
/// `json` must be NUL-terminated; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn lgd_model_from_json(
    json: *const c_char,
    out: *mut *mut LgdModel,
) -> LgdStatus {
    if out.is_null() {
        return fail(LgdStatus::NullPointer, "null output pointer");
    }
    let text = match str_arg(json) {
        Ok(s) => s,
        Err(status) => return status,
    };
    match serde_json::from_str::<FittedModel>(text) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(LgdModel { inner }));
            LgdStatus::Ok
        }
        Err(e) => fail(LgdStatus::InvalidArgument, e.to_string()),
    }
}

/// Release a model handle.
///
/// # Safety
/// `model` must have come from this library and not yet be freed.
#[no_mangle]
pub unsafe extern "C" fn lgd_model_free(model: *mut LgdModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Stratified k-fold cross-validation of one family; writes the
/// fold-averaged RMSE, R², and MAE.
///
/// # Safety
/// `dataset` must be live; `family` NUL-terminated; outputs valid.
#[no_mangle]
pub unsafe extern "C" fn lgd_cross_validate(
    dataset: *const LgdDataset,
    family: *const c_char,
    folds: usize,
    seed: u64,
    out_rmse: *mut f64,
    out_r2: *mut f64,
    out_mae: *mut f64,
) -> LgdStatus {
    if dataset.is_null() || out_rmse.is_null() || out_r2.is_null() || out_mae.is_null() {
        return fail(LgdStatus::NullPointer, "null argument");
    }
    let family = match str_arg(family) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let spec = match spec_for(family, seed) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let report = match evaluate::run_comparison(&(*dataset).inner, &[spec], folds, seed) {
        Ok(r) => r,
        Err(e) => return fail(LgdStatus::InvalidArgument, e.to_string()),
    };
    let metrics = &report.models[0].fold_mean;
    *out_rmse = metrics.rmse;
    *out_r2 = metrics.r2;
    *out_mae = metrics.mae;
    LgdStatus::Ok
}

/// Sturges bin count (rounded form).
#[no_mangle]
pub extern "C" fn lgd_sturges_bins(n: usize) -> usize {
    entropy::sturges_bins(n)
}

/// Histogram entropy of `values` over `bins` equal-width bins, in bits;
/// `corrected` applies the finite-sample bias correction.
///
/// # Safety
/// `values` must point to `len` doubles; `out_bits` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lgd_histogram_entropy(
    values: *const f64,
    len: usize,
    bins: usize,
    corrected: bool,
    out_bits: *mut f64,
) -> LgdStatus {
    if values.is_null() || out_bits.is_null() {
        return fail(LgdStatus::NullPointer, "null argument");
    }
    let slice = std::slice::from_raw_parts(values, len);
    match entropy::histogram_entropy(slice, bins) {
        Ok(estimate) => {
            *out_bits = if corrected {
                entropy::miller_madow(&estimate).value_bits
            } else {
                estimate.value_bits
            };
            LgdStatus::Ok
        }
        Err(e) => fail(LgdStatus::InvalidArgument, e.to_string()),
    }
}

/// Bias-corrected mutual information between two equal-length columns, in
/// bits (floored at zero).
///
/// # Safety
/// `x` and `y` must each point to `len` doubles; `out_bits` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lgd_mutual_information(
    x: *const f64,
    y: *const f64,
    len: usize,
    bins: usize,
    out_bits: *mut f64,
) -> LgdStatus {
    if x.is_null() || y.is_null() || out_bits.is_null() {
        return fail(LgdStatus::NullPointer, "null argument");
    }
    let xs = std::slice::from_raw_parts(x, len);
    let ys = std::slice::from_raw_parts(y, len);
    match entropy::mutual_information(Condition::Continuous { values: xs, bins }, ys, bins) {
        Ok(estimate) => {
            *out_bits = estimate.value_bits;
            LgdStatus::Ok
        }
        Err(e) => fail(LgdStatus::InvalidArgument, e.to_string()),
    }
}

/// Closed-form Gaussian mutual information `-1/2 log2(1 - rho^2)`, bits.
///
/// # Safety
/// `out_bits` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lgd_gaussian_mi(rho: f64, out_bits: *mut f64) -> LgdStatus {
    if out_bits.is_null() {
        return fail(LgdStatus::NullPointer, "null argument");
    }
    match entropy::gaussian_mi(rho) {
        Ok(estimate) => {
            *out_bits = estimate.value_bits;
            LgdStatus::Ok
        }
        Err(e) => fail(LgdStatus::InvalidArgument, e.to_string()),
    }
}

/// Information-theoretic R² ceiling `1 - exp(-2 I)` for `mi_bits` of mutual
/// information.
#[no_mangle]
pub extern "C" fn lgd_r2_ceiling(mi_bits: f64) -> f64 {
    let estimate = lgdkit::entropy::InfoEstimate {
        value_bits: mi_bits,
        raw_bits: mi_bits,
        bins_x: None,
        bins_y: 1,
        occupied_bins: 1,
        n: 1,
        corrected: false,
    };
    entropy::r2_ceiling(&estimate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;

    fn c(s: &str) -> CString {
        CString::new(s).unwrap()
    }

    #[test]
    fn dataset_generate_len_and_mixture() {
        unsafe {
            let mut handle: *mut LgdDataset = ptr::null_mut();
            assert_eq!(lgd_dataset_generate(500, 0.9, 7, &mut handle), LgdStatus::Ok);
            let mut len = 0usize;
            assert_eq!(lgd_dataset_len(handle, &mut len), LgdStatus::Ok);
            assert_eq!(len, 500);
            let mut share = 0.0;
            assert_eq!(lgd_dataset_mixture_proportion(handle, &mut share), LgdStatus::Ok);
            assert!((share - 0.9).abs() < 0.05);
            let mut labels = vec![0.0; 500];
            assert_eq!(lgd_dataset_labels(handle, labels.as_mut_ptr(), 500), LgdStatus::Ok);
            assert!(labels.iter().all(|&v| (0.0..=1.0).contains(&v)));
            lgd_dataset_free(handle);
        }
    }

    #[test]
    fn invalid_config_reports_message() {
        unsafe {
            let mut handle: *mut LgdDataset = ptr::null_mut();
            let status = lgd_dataset_generate(500, 1.5, 7, &mut handle);
            assert_eq!(status, LgdStatus::InvalidArgument);
            let mut buffer = vec![0i8; 256];
            let len = lgd_last_error_message(buffer.as_mut_ptr(), buffer.len());
            assert!(len > 0);
            let message = CStr::from_ptr(buffer.as_ptr()).to_string_lossy();
            assert!(message.contains("pi_proxy"), "{message}");
        }
    }

    #[test]
    fn fit_predict_and_json_round_trip() {
        unsafe {
            let mut data: *mut LgdDataset = ptr::null_mut();
            assert_eq!(lgd_dataset_generate(300, 0.9, 3, &mut data), LgdStatus::Ok);

            let family = c("forest");
            let mut model: *mut LgdModel = ptr::null_mut();
            assert_eq!(lgd_model_fit(data, family.as_ptr(), 5, &mut model), LgdStatus::Ok);

            let mut predictions = vec![0.0; 300];
            assert_eq!(
                lgd_model_predict(model, data, predictions.as_mut_ptr(), 300),
                LgdStatus::Ok
            );
            assert!(predictions.iter().all(|&p| (0.0..=1.0).contains(&p)));

            let mut json: *mut c_char = ptr::null_mut();
            assert_eq!(lgd_model_to_json(model, &mut json), LgdStatus::Ok);
            let mut restored: *mut LgdModel = ptr::null_mut();
            assert_eq!(lgd_model_from_json(json, &mut restored), LgdStatus::Ok);
            let mut again = vec![0.0; 300];
            assert_eq!(
                lgd_model_predict(restored, data, again.as_mut_ptr(), 300),
                LgdStatus::Ok
            );
            assert_eq!(predictions, again);

            lgd_string_free(json);
            lgd_model_free(model);
            lgd_model_free(restored);
            lgd_dataset_free(data);
        }
    }

    #[test]
    fn wrong_buffer_length_is_rejected() {
        unsafe {
            let mut data: *mut LgdDataset = ptr::null_mut();
            assert_eq!(lgd_dataset_generate(100, 0.9, 1, &mut data), LgdStatus::Ok);
            let mut buffer = vec![0.0; 50];
            assert_eq!(
                lgd_dataset_labels(data, buffer.as_mut_ptr(), 50),
                LgdStatus::InvalidArgument
            );
            lgd_dataset_free(data);
        }
    }

    #[test]
    fn unknown_family_is_invalid() {
        unsafe {
            let mut data: *mut LgdDataset = ptr::null_mut();
            assert_eq!(lgd_dataset_generate(100, 0.9, 1, &mut data), LgdStatus::Ok);
            let family = c("boosting");
            let mut model: *mut LgdModel = ptr::null_mut();
            assert_eq!(
                lgd_model_fit(data, family.as_ptr(), 0, &mut model),
                LgdStatus::InvalidArgument
            );
            lgd_dataset_free(data);
        }
    }

    #[test]
    fn cross_validate_reports_metrics() {
        unsafe {
            let mut data: *mut LgdDataset = ptr::null_mut();
            assert_eq!(lgd_dataset_generate(400, 0.9, 11, &mut data), LgdStatus::Ok);
            let family = c("industry");
            let (mut rmse, mut r2, mut mae) = (0.0, 0.0, 0.0);
            assert_eq!(
                lgd_cross_validate(data, family.as_ptr(), 5, 1, &mut rmse, &mut r2, &mut mae),
                LgdStatus::Ok
            );
            assert!(rmse > 0.0 && mae > 0.0 && r2 <= 1.0);
            lgd_dataset_free(data);
        }
    }

    #[test]
    fn numeric_primitives_match_library() {
        unsafe {
            let values: Vec<f64> = (0..800).map(|i| (i % 8) as f64).collect();
            let mut bits = 0.0;
            assert_eq!(
                lgd_histogram_entropy(values.as_ptr(), values.len(), 8, false, &mut bits),
                LgdStatus::Ok
            );
            assert!((bits - 3.0).abs() < 1e-12);

            let mut mi = 0.0;
            assert_eq!(
                lgd_mutual_information(values.as_ptr(), values.as_ptr(), values.len(), 8, &mut mi),
                LgdStatus::Ok
            );
            assert!(mi > 2.9);

            let mut g = 0.0;
            assert_eq!(lgd_gaussian_mi(0.6, &mut g), LgdStatus::Ok);
            assert!((g - 0.3219).abs() < 1e-3);
            assert_eq!(lgd_gaussian_mi(1.0, &mut g), LgdStatus::InvalidArgument);

            assert_eq!(lgd_sturges_bins(1218), 11);
            assert_eq!(lgd_r2_ceiling(0.0), 0.0);
            assert!(lgd_r2_ceiling(1.0) > 0.7);
        }
    }

    #[test]
    fn csv_load_maps_missing_file_to_io() {
        unsafe {
            let path = c("/nonexistent/file.csv");
            let mut data: *mut LgdDataset = ptr::null_mut();
            assert_eq!(lgd_dataset_load_csv(path.as_ptr(), &mut data), LgdStatus::Io);
        }
    }
}
