//! C ABI for risklab.
//!
//! Every fallible call returns a `RisklabStatus`; on failure the message is
//! available from `risklab_last_error` on the same thread. Objects cross the
//! boundary as opaque handles that the caller releases with the matching
//! `*_free` function. Panics never unwind into C: they are caught and
//! reported as `RISKLAB_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use nalgebra::DMatrix;
use risklab::doc::Document;
use risklab::glm::{self, GlmFit, Penalty};
use risklab::interpret::garson;
use risklab::nn::{self, Activation, Architecture, NnModel, TrainConfig};
use risklab::sim::{self, SimConfig};
use risklab::{Column, Dataset, Error, ProbabilityModel};

/// Result of every fallible call. The first four values match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RisklabStatus {
    Ok = 0,
    Config = 1,
    Io = 2,
    Numerical = 3,
    NullPointer = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// Penalty applied by `risklab_glm_fit`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RisklabPenalty {
    None = 0,
    Ridge = 1,
    Lasso = 2,
}

/// A cohort: feature matrix, column names and binary labels.
pub struct RisklabDataset(Dataset);

/// A fitted logistic regression.
pub struct RisklabGlm(GlmFit);

/// A trained feedforward network.
pub struct RisklabNn(NnModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let text = CString::new(message.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

fn status_of(error: &Error) -> RisklabStatus {
    match error.exit_code() {
        2 => RisklabStatus::Io,
        3 => RisklabStatus::Numerical,
        _ => RisklabStatus::Config,
    }
}

enum Failure {
    Lib(Error),
    Null(&'static str),
    Buffer { needed: usize, given: usize },
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Runs `f`, records any failure and maps it to a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RisklabStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RisklabStatus::Ok,
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(name))) => {
            set_error(format!("`{name}` must not be null"));
            RisklabStatus::NullPointer
        }
        Ok(Err(Failure::Buffer { needed, given })) => {
            set_error(format!("buffer holds {given} values, {needed} are needed"));
            RisklabStatus::BufferTooSmall
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {message}"));
            RisklabStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(name))
}

unsafe fn path_arg(p: *const c_char, name: &'static str) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Error::Config(format!("`{name}` is not valid UTF-8")))?;
    Ok(PathBuf::from(s))
}

unsafe fn out_slice<'a>(p: *mut f64, len: usize, needed: usize) -> Result<&'a mut [f64], Failure> {
    if p.is_null() {
        return Err(Failure::Null("out"));
    }
    if len < needed {
        return Err(Failure::Buffer { needed, given: len });
    }
    Ok(std::slice::from_raw_parts_mut(p, needed))
}

fn store<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    // SAFETY: checked non-null; the caller provides a writable slot
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next risklab call on the same thread.
#[no_mangle]
pub extern "C" fn risklab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn risklab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Simulates the study cohort: `n` rows from `seed`, with intercept `intercept`.
///
/// # Safety
/// `out` must point to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn risklab_dataset_simulate(
    n: usize,
    seed: u64,
    intercept: f64,
    out: *mut *mut RisklabDataset,
) -> RisklabStatus {
    guard(|| {
        let config = SimConfig {
            n,
            seed,
            intercept,
            ..SimConfig::default()
        };
        store(out, RisklabDataset(sim::simulate(&config)?))
    })
}

/// Builds a dataset from a row-major `rows × cols` matrix and 0/1 labels.
/// `names` may be null, giving columns `x1, x2, ...`; all columns are continuous.
///
/// # Safety
/// `values` must hold `rows * cols` doubles, `labels` `rows` bytes, and
/// `names` (when non-null) `cols` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn risklab_dataset_from_rows(
    values: *const f64,
    rows: usize,
    cols: usize,
    labels: *const u8,
    names: *const *const c_char,
    out: *mut *mut RisklabDataset,
) -> RisklabStatus {
    guard(|| {
        if values.is_null() && rows * cols > 0 {
            return Err(Failure::Null("values"));
        }
        if labels.is_null() && rows > 0 {
            return Err(Failure::Null("labels"));
        }
        let x = if rows * cols == 0 {
            DMatrix::zeros(rows, cols)
        } else {
            DMatrix::from_row_slice(rows, cols, std::slice::from_raw_parts(values, rows * cols))
        };
        let y = if rows == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(labels, rows).to_vec()
        };
        let columns = (0..cols)
            .map(|j| {
                if names.is_null() {
                    return Ok(Column::continuous(format!("x{}", j + 1)));
                }
                let p = *names.add(j);
                if p.is_null() {
                    return Err(Failure::Null("names[j]"));
                }
                let name = CStr::from_ptr(p)
                    .to_str()
                    .map_err(|_| Error::Config(format!("column name {j} is not valid UTF-8")))?;
                Ok(Column::continuous(name))
            })
            .collect::<Result<Vec<_>, Failure>>()?;
        store(out, RisklabDataset(Dataset::new(columns, x, y)?))
    })
}

/// Reads a CSV with a header row and a final `label` column.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn risklab_dataset_read_csv(
    path: *const c_char,
    out: *mut *mut RisklabDataset,
) -> RisklabStatus {
    guard(|| {
        let path = path_arg(path, "path")?;
        store(out, RisklabDataset(Dataset::read_csv(&path)?))
    })
}

/// # Safety
/// `data` must be a live dataset handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn risklab_dataset_write_csv(
    data: *const RisklabDataset,
    path: *const c_char,
) -> RisklabStatus {
    guard(|| {
        let data = borrow(data, "data")?;
        data.0.write_csv(&path_arg(path, "path")?)?;
        Ok(())
    })
}

/// Number of rows, or 0 for a null handle.
///
/// # Safety
/// `data` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn risklab_dataset_rows(data: *const RisklabDataset) -> usize {
    data.as_ref().map_or(0, |d| d.0.nrows())
}

/// Number of feature columns, or 0 for a null handle.
///
/// # Safety
/// `data` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn risklab_dataset_cols(data: *const RisklabDataset) -> usize {
    data.as_ref().map_or(0, |d| d.0.ncols())
}

/// # Safety
/// `data` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn risklab_dataset_free(data: *mut RisklabDataset) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

/// Fits a logistic regression. `lambda` is ignored for `RISKLAB_PENALTY_NONE`.
///
/// # Safety
/// `data` must be a live dataset handle; `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn risklab_glm_fit(
    data: *const RisklabDataset,
    penalty: RisklabPenalty,
    lambda: f64,
    out: *mut *mut RisklabGlm,
) -> RisklabStatus {
    guard(|| {
        let data = borrow(data, "data")?;
        let penalty = match penalty {
            RisklabPenalty::None => Penalty::None,
            RisklabPenalty::Ridge => Penalty::Ridge(lambda),
            RisklabPenalty::Lasso => Penalty::Lasso(lambda),
        };
        store(out, RisklabGlm(glm::fit_logistic(&data.0, penalty)?))
    })
}

/// Number of coefficients (intercept plus one per feature).
///
/// # Safety
/// `fit` must be null or a live GLM handle.
#[no_mangle]
pub unsafe extern "C" fn risklab_glm_coefficient_count(fit: *const RisklabGlm) -> usize {
    fit.as_ref().map_or(0, |f| f.0.coefficients.len())
}

/// Copies the intercept and slopes into `out`.
///
/// # Safety
/// `fit` must be a live GLM handle and `out` hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn risklab_glm_coefficients(
    fit: *const RisklabGlm,
    out: *mut f64,
    len: usize,
) -> RisklabStatus {
    guard(|| {
        let fit = borrow(fit, "fit")?;
        let dst = out_slice(out, len, fit.0.coefficients.len())?;
        dst.copy_from_slice(&fit.0.coefficients);
        Ok(())
    })
}

/// Copies the Wald standard errors and p-values (intercept first). Fails for
/// penalized fits.
///
/// # Safety
/// `fit` must be a live GLM handle; each buffer must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn risklab_glm_inference(
    fit: *const RisklabGlm,
    std_errors: *mut f64,
    p_values: *mut f64,
    len: usize,
) -> RisklabStatus {
    guard(|| {
        let fit = borrow(fit, "fit")?;
        let inference = fit.0.inference.as_ref().ok_or_else(|| {
            Error::InferenceUnavailable("Wald inference needs an unpenalized fit".into())
        })?;
        let k = fit.0.coefficients.len();
        out_slice(std_errors, len, k)?.copy_from_slice(&inference.std_errors);
        out_slice(p_values, len, k)?.copy_from_slice(&inference.p_values);
        Ok(())
    })
}

unsafe fn predict_into(
    model: &dyn ProbabilityModel,
    data: *const RisklabDataset,
    out: *mut f64,
    len: usize,
) -> Result<(), Failure> {
    let data = borrow(data, "data")?;
    let probs = model.predict(&data.0)?;
    out_slice(out, len, probs.len())?.copy_from_slice(&probs);
    Ok(())
}

/// Writes P(event) for every row of `data` into `out`.
///
/// # Safety
/// Handles must be live; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn risklab_glm_predict(
    fit: *const RisklabGlm,
    data: *const RisklabDataset,
    out: *mut f64,
    len: usize,
) -> RisklabStatus {
    guard(|| predict_into(&borrow(fit, "fit")?.0, data, out, len))
}

/// # Safety
/// `fit` must be a live GLM handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn risklab_glm_save(fit: *const RisklabGlm, path: *const c_char) -> RisklabStatus {
    guard(|| {
        let fit = borrow(fit, "fit")?;
        fit.0.to_document().write(&path_arg(path, "path")?)?;
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn risklab_glm_load(path: *const c_char, out: *mut *mut RisklabGlm) -> RisklabStatus {
    guard(|| {
        let doc = Document::read(&path_arg(path, "path")?)?;
        store(out, RisklabGlm(GlmFit::from_document(&doc)?))
    })
}

/// # Safety
/// `fit` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn risklab_glm_free(fit: *mut RisklabGlm) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// Training options for `risklab_nn_train`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RisklabNnOptions {
    /// Hidden layer sizes; `hidden_len` entries.
    pub hidden: *const usize,
    pub hidden_len: usize,
    /// Activation tag such as `sigmoid`, `tanh`, `relu(0.1)` or `selu(1.67,1.05)`;
    /// null means sigmoid.
    pub activation: *const c_char,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

/// Options matching the simulation-study defaults (one hidden layer of three).
#[no_mangle]
pub extern "C" fn risklab_nn_default_options() -> RisklabNnOptions {
    static HIDDEN: [usize; 1] = [3];
    let t = TrainConfig::default();
    RisklabNnOptions {
        hidden: HIDDEN.as_ptr(),
        hidden_len: HIDDEN.len(),
        activation: ptr::null(),
        learning_rate: t.learning_rate,
        epochs: t.epochs,
        batch_size: t.batch_size,
        seed: t.seed,
    }
}

/// Trains a two-class network on `data`.
///
/// # Safety
/// `data` must be a live dataset handle, `options` valid for reading and its
/// pointers valid as documented on `RisklabNnOptions`; `out` a writable slot.
#[no_mangle]
pub unsafe extern "C" fn risklab_nn_train(
    data: *const RisklabDataset,
    options: *const RisklabNnOptions,
    out: *mut *mut RisklabNn,
) -> RisklabStatus {
    guard(|| {
        let data = borrow(data, "data")?;
        let o = borrow(options, "options")?;
        if o.hidden.is_null() && o.hidden_len > 0 {
            return Err(Failure::Null("options.hidden"));
        }
        let hidden = if o.hidden_len == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(o.hidden, o.hidden_len).to_vec()
        };
        let activation = if o.activation.is_null() {
            Activation::Sigmoid
        } else {
            CStr::from_ptr(o.activation)
                .to_str()
                .map_err(|_| Error::Config("activation is not valid UTF-8".into()))?
                .parse()?
        };
        let arch = Architecture {
            hidden,
            classes: 2,
            activation,
        };
        let config = TrainConfig {
            learning_rate: o.learning_rate,
            epochs: o.epochs,
            batch_size: o.batch_size,
            seed: o.seed,
            ..TrainConfig::default()
        };
        store(out, RisklabNn(nn::train(&data.0, &arch, &config)?.model))
    })
}

/// Writes P(event) for every row of `data` into `out`.
///
/// # Safety
/// Handles must be live; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn risklab_nn_predict(
    model: *const RisklabNn,
    data: *const RisklabDataset,
    out: *mut f64,
    len: usize,
) -> RisklabStatus {
    guard(|| predict_into(&borrow(model, "model")?.0, data, out, len))
}

/// Garson importances, one per input feature, summing to one. Fails unless
/// the network has exactly one hidden layer.
///
/// # Safety
/// `model` must be a live network handle and `out` hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn risklab_nn_garson(model: *const RisklabNn, out: *mut f64, len: usize) -> RisklabStatus {
    guard(|| {
        let model = borrow(model, "model")?;
        let scores = garson(&model.0)?.scores;
        out_slice(out, len, scores.len())?.copy_from_slice(&scores);
        Ok(())
    })
}

/// # Safety
/// `model` must be a live network handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn risklab_nn_save(model: *const RisklabNn, path: *const c_char) -> RisklabStatus {
    guard(|| {
        let model = borrow(model, "model")?;
        model.0.to_document().write(&path_arg(path, "path")?)?;
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn risklab_nn_load(path: *const c_char, out: *mut *mut RisklabNn) -> RisklabStatus {
    guard(|| {
        let doc = Document::read(&path_arg(path, "path")?)?;
        store(out, RisklabNn(NnModel::from_document(&doc)?))
    })
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn risklab_nn_free(model: *mut RisklabNn) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}
