//! C ABI for trendmine.
//!
//! Conventions:
//! - Every fallible function returns a [`TmStatus`]; on failure a message is
//!   available from [`tm_last_error`] on the same thread.
//! - Strings returned through out-parameters are owned by the caller and must
//!   be released with [`tm_string_free`].
//! - Configuration lives behind the opaque [`TmConfig`] handle, created with
//!   [`tm_config_new`] or [`tm_config_load`] and released with
//!   [`tm_config_free`].
//! - Panics never cross the boundary; they are reported as
//!   [`TmStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use trendmine::clustering::{hdbscan, HdbscanParams, Metric};
use trendmine::config::Config;
use trendmine::pipeline::run_pipeline;
use trendmine::textprep::{ngrams, Preprocessor};
use trendmine::trends::fit_ols;
use trendmine::Error;

/// Result codes. The first four match the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TmStatus {
    Ok = 0,
    /// Bad configuration or parameter.
    Usage = 1,
    /// Malformed or unusable input data.
    Data = 2,
    Internal = 3,
    /// A required pointer argument was null.
    NullArgument = 4,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 5,
    /// The library panicked; state touched by the call is unspecified.
    Panic = 6,
}

/// Distance used by [`tm_hdbscan`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TmMetric {
    Euclidean = 0,
    Cosine = 1,
}

/// Least-squares line fitted by [`tm_fit_ols`].
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TmOlsFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Opaque pipeline configuration.
pub struct TmConfig {
    inner: Config,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(TmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e.exit_code() {
            1 => TmStatus::Usage,
            2 => TmStatus::Data,
            _ => TmStatus::Internal,
        };
        Failure(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TmStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TmStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            TmStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(TmStatus::NullArgument, format!("`{what}` is null"))
}

/// # Safety
/// `p` must be null or a valid NUL-terminated string.
unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(TmStatus::InvalidUtf8, format!("`{what}` is not valid UTF-8")))
}

/// # Safety
/// `out` must be null or valid for one pointer write.
unsafe fn put_string(out: *mut *mut c_char, s: String, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    let c = CString::new(s).map_err(|_| Failure(TmStatus::Internal, "string contains NUL".into()))?;
    *out = c.into_raw();
    Ok(())
}

fn json(value: &impl serde::Serialize) -> Result<String, Failure> {
    serde_json::to_string(value).map_err(|e| Failure(TmStatus::Internal, e.to_string()))
}

/// The library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// The message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn tm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a pointer obtained from this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// A configuration with every default.
#[no_mangle]
pub extern "C" fn tm_config_new() -> *mut TmConfig {
    Box::into_raw(Box::new(TmConfig { inner: Config::default() }))
}

/// Loads a TOML configuration file into a new handle stored in `*out`.
///
/// # Safety
/// `path` must be a valid NUL-terminated string; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tm_config_load(path: *const c_char, out: *mut *mut TmConfig) -> TmStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = Config::load(Path::new(path))?;
        *out = Box::into_raw(Box::new(TmConfig { inner }));
        Ok(())
    })
}

/// Sets one configuration key; `value` is a TOML literal or a bare string.
///
/// # Safety
/// `cfg` must be a live handle; `key` and `value` valid NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn tm_config_set(cfg: *mut TmConfig, key: *const c_char, value: *const c_char) -> TmStatus {
    guard(|| {
        let cfg = cfg.as_mut().ok_or_else(|| null("cfg"))?;
        let key = str_arg(key, "key")?;
        let value = str_arg(value, "value")?;
        cfg.inner.set(key, value)?;
        Ok(())
    })
}

/// Writes the configuration as a TOML document to `*out`.
///
/// # Safety
/// `cfg` must be a live handle; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tm_config_to_toml(cfg: *const TmConfig, out: *mut *mut c_char) -> TmStatus {
    guard(|| {
        let cfg = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        put_string(out, cfg.inner.to_toml()?, "out")
    })
}

/// Releases a configuration handle. Null is ignored.
///
/// # Safety
/// `cfg` must be null or a live handle not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tm_config_free(cfg: *mut TmConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Runs the full pipeline into `out_dir`. On success the run report (JSON)
/// is stored in `*report_json` unless `report_json` is null.
///
/// # Safety
/// `cfg` must be a live handle; `out_dir` a valid NUL-terminated string;
/// `report_json` null or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tm_run_pipeline(
    cfg: *const TmConfig,
    out_dir: *const c_char,
    report_json: *mut *mut c_char,
) -> TmStatus {
    guard(|| {
        let cfg = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        let out_dir = str_arg(out_dir, "out_dir")?;
        let report = run_pipeline(&cfg.inner, Path::new(out_dir))?;
        if report_json.is_null() {
            return Ok(());
        }
        put_string(report_json, json(&report)?, "report_json")
    })
}

/// Preprocesses one text with the bundled resources. `lang` ("en", "ar") may
/// be null. The result is a JSON object with `cleaned_text`, `tokens`,
/// `ngrams` and `token_count`.
///
/// # Safety
/// `text` must be a valid NUL-terminated string; `lang` null or one;
/// `out_json` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tm_preprocess_text(
    text: *const c_char,
    lang: *const c_char,
    out_json: *mut *mut c_char,
) -> TmStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        let lang = if lang.is_null() { None } else { Some(str_arg(lang, "lang")?) };
        let pre = Preprocessor::default();
        let cleaned_text = pre.clean_text(text, lang);
        let tokens = pre.terms_of(&cleaned_text, lang);
        let value = serde_json::json!({
            "cleaned_text": cleaned_text,
            "token_count": tokens.len(),
            "ngrams": ngrams(&tokens),
            "tokens": tokens,
        });
        put_string(out_json, json(&value)?, "out_json")
    })
}

/// Clusters `n_points` row-major vectors of `dim` values. Labels (−1 for
/// noise) are written to `labels_out[0..n_points]`. `min_samples` of 0 means
/// "same as `min_cluster_size`".
///
/// # Safety
/// `data` must point to `n_points * dim` readable doubles and `labels_out`
/// to `n_points` writable 64-bit integers.
#[no_mangle]
pub unsafe extern "C" fn tm_hdbscan(
    data: *const f64,
    n_points: usize,
    dim: usize,
    min_cluster_size: usize,
    min_samples: usize,
    metric: TmMetric,
    labels_out: *mut i64,
) -> TmStatus {
    guard(|| {
        if data.is_null() {
            return Err(null("data"));
        }
        if labels_out.is_null() {
            return Err(null("labels_out"));
        }
        let len = n_points
            .checked_mul(dim)
            .ok_or_else(|| Failure(TmStatus::Usage, "n_points * dim overflows".into()))?;
        let flat = std::slice::from_raw_parts(data, len);
        let vectors: Vec<Vec<f64>> = if dim == 0 {
            vec![Vec::new(); n_points]
        } else {
            flat.chunks(dim).map(<[f64]>::to_vec).collect()
        };
        let mut params = HdbscanParams::new(min_cluster_size).with_metric(match metric {
            TmMetric::Euclidean => Metric::Euclidean,
            TmMetric::Cosine => Metric::Cosine,
        });
        if min_samples > 0 {
            params = params.with_min_samples(min_samples);
        }
        let model = hdbscan(&vectors, &params)?;
        std::slice::from_raw_parts_mut(labels_out, n_points).copy_from_slice(&model.labels);
        Ok(())
    })
}

/// Ordinary least squares of `ys` on `xs` (both of length `n`).
///
/// # Safety
/// `xs` and `ys` must point to `n` readable doubles; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tm_fit_ols(xs: *const f64, ys: *const f64, n: usize, out: *mut TmOlsFit) -> TmStatus {
    guard(|| {
        if xs.is_null() || ys.is_null() {
            return Err(null(if xs.is_null() { "xs" } else { "ys" }));
        }
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let xs = std::slice::from_raw_parts(xs, n);
        let ys = std::slice::from_raw_parts(ys, n);
        let points: Vec<(f64, f64)> = xs.iter().copied().zip(ys.iter().copied()).collect();
        let fit = fit_ols(&points)?;
        *out = TmOlsFit { slope: fit.slope, intercept: fit.intercept, r_squared: fit.r_squared };
        Ok(())
    })
}
