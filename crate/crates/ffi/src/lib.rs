//! C ABI over the confboost library.
//!
//! Every function returns a [`CbStatus`]. On failure the message is kept in
//! thread-local storage and read with [`cb_last_error_message`]. Datasets and
//! models are opaque handles owned by the caller and released with their
//! `_free` function. Strings returned through out-parameters are released
//! with [`cb_string_free`].

use confboost::boost::{boost_ds, boost_lmc, boost_rlc, BoostedModel, RlcOptions};
use confboost::encoding::{fold_labels, standardize};
use confboost::harness::{self, HarnessError, LabelColumn, LabelMapping};
use confboost::protocol::{reconstruct_model, run_learning, Construction, ProtocolConfig, TransportKind};
use confboost::Dataset;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CbStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    Training = 5,
    Protocol = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CbBase {
    Rlc = 0,
    Stump = 1,
    Lmc = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CbConstruction {
    HeGc = 0,
    SecshGc = 1,
}

/// Opaque dataset handle.
pub struct CbDataset(Dataset);

/// Opaque model handle.
pub struct CbModel(BoostedModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(CbStatus, String);

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        let s = match &e {
            HarnessError::Io(_) => CbStatus::Io,
            HarnessError::Parse { .. } | HarnessError::NonBinaryLabels { .. } => CbStatus::Parse,
            HarnessError::Protocol(_) => CbStatus::Protocol,
            HarnessError::Boost(_) => CbStatus::Training,
            _ => CbStatus::InvalidArgument,
        };
        Failure(s, e.to_string())
    }
}

macro_rules! fail_from {
    ($($t:ty => $s:ident),*) => {
        $(impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure(CbStatus::$s, e.to_string())
            }
        })*
    };
}

fail_from!(
    confboost::boost::BoostError => Training,
    confboost::encoding::EncodingError => InvalidArgument,
    confboost::protocol::ProtocolError => Protocol
);

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(CbStatus::InvalidArgument, msg.into())
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CbStatus::Ok
        }
        Ok(Err(Failure(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            CbStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(CbStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not UTF-8")))
}

unsafe fn opt_str_arg<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        str_arg(p, what).map(Some)
    }
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(CbStatus::NullArgument, format!("{what} is null")))
}

unsafe fn put<T>(out: *mut *mut T, v: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(CbStatus::NullArgument, "output pointer is null".into()));
    }
    *out = Box::into_raw(Box::new(v));
    Ok(())
}

/// Message for the last failed call on this thread, or NULL after a
/// successful one. Valid until the next call into this library.
#[no_mangle]
pub extern "C" fn cb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Loads a CSV with a header row. `label_column` may be NULL (last column),
/// a 0-based index or a header name. `positive` may be NULL when the labels
/// are already +1/-1 or 1/0.
///
/// # Safety
/// String arguments must be NUL-terminated or NULL where allowed; `out`
/// must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn cb_dataset_load_csv(
    path: *const c_char,
    label_column: *const c_char,
    positive: *const c_char,
    out: *mut *mut CbDataset,
) -> CbStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let label = match opt_str_arg(label_column, "label_column")? {
            Some(s) => match s.parse::<LabelColumn>() {
                Ok(l) => l,
                Err(e) => match e {},
            },
            None => LabelColumn::Last,
        };
        let mapping = LabelMapping {
            positive: opt_str_arg(positive, "positive")?.map(str::to_string),
        };
        let d = harness::load_csv(Path::new(path), &label, &mapping)?;
        put(out, CbDataset(d))
    })
}

/// One of the bundled datasets ("ionosphere", "credit").
///
/// # Safety
/// `name` must be NUL-terminated; `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn cb_dataset_builtin(name: *const c_char, out: *mut *mut CbDataset) -> CbStatus {
    guard(|| {
        let d = harness::builtin(str_arg(name, "name")?)?;
        put(out, CbDataset(d))
    })
}

/// Seeded synthetic dataset with `n` records and `k` features.
///
/// # Safety
/// `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn cb_dataset_synthetic(
    n: usize,
    k: usize,
    seed: u64,
    out: *mut *mut CbDataset,
) -> CbStatus {
    guard(|| put(out, CbDataset(harness::gen_synthetic(n, k, seed)?)))
}

/// Record count, or 0 for a NULL handle.
///
/// # Safety
/// `ds` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cb_dataset_n(ds: *const CbDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.n())
}

/// Feature count, or 0 for a NULL handle.
///
/// # Safety
/// `ds` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cb_dataset_k(ds: *const CbDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.k())
}

/// # Safety
/// `ds` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cb_dataset_free(ds: *mut CbDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Plaintext boosting with `rounds` base classifiers. `seed` picks the RLC
/// pool and is ignored by the other bases.
///
/// # Safety
/// `ds` must be a live handle; `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn cb_train_plain(
    ds: *const CbDataset,
    base: CbBase,
    rounds: usize,
    seed: u64,
    out: *mut *mut CbModel,
) -> CbStatus {
    guard(|| {
        let d = &handle(ds, "dataset")?.0;
        let (x, s) = standardize(&d.features)?;
        let mut m = match base {
            CbBase::Rlc => boost_rlc(&fold_labels(&x, &d.labels)?, &RlcOptions::new(rounds), seed)?.model,
            CbBase::Stump => boost_ds(&x, &d.labels, rounds)?,
            CbBase::Lmc => boost_lmc(&x, &d.labels, rounds)?,
        };
        m.standardizer = Some(s);
        put(out, CbModel(m))
    })
}

/// Runs the two-party protocol in-process. `p_max` of 0 means 2 * `tau`;
/// `frac_bits` and `key_bits` of 0 take the defaults.
///
/// # Safety
/// `ds` must be a live handle; `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn cb_train_secure(
    ds: *const CbDataset,
    construction: CbConstruction,
    tau: usize,
    p_max: usize,
    frac_bits: u32,
    key_bits: u32,
    out: *mut *mut CbModel,
) -> CbStatus {
    guard(|| {
        let d = &handle(ds, "dataset")?.0;
        let c = match construction {
            CbConstruction::HeGc => Construction::HeGc,
            CbConstruction::SecshGc => Construction::SecShGc,
        };
        let mut cfg = ProtocolConfig::new(c, tau);
        if p_max != 0 {
            cfg.p_max = p_max;
        }
        if frac_bits != 0 {
            cfg.frac_bits = frac_bits;
        }
        if key_bits != 0 {
            cfg.key_bits = key_bits;
        }
        let (x, s) = standardize(&d.features)?;
        let z = fold_labels(&x, &d.labels)?;
        let outcome = run_learning(&cfg, &z, TransportKind::InProcess)?;
        let mut m = reconstruct_model(&outcome.model, outcome.fixed_point)?;
        m.standardizer = Some(s);
        put(out, CbModel(m))
    })
}

/// Number of base classifiers in the model, or 0 for a NULL handle.
///
/// # Safety
/// `model` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cb_model_len(model: *const CbModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.len())
}

/// Predicts +1 or -1 for one raw (unstandardized) record of `len` features.
///
/// # Safety
/// `x` must point to `len` doubles; `label` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn cb_model_predict(
    model: *const CbModel,
    x: *const f64,
    len: usize,
    label: *mut i8,
) -> CbStatus {
    guard(|| {
        let m = &handle(model, "model")?.0;
        if x.is_null() || label.is_null() {
            return Err(Failure(CbStatus::NullArgument, "x or label is null".into()));
        }
        let row = std::slice::from_raw_parts(x, len);
        if let Some(s) = &m.standardizer {
            if s.input_cols() != len {
                return Err(invalid(format!(
                    "model expects {} features, got {len}",
                    s.input_cols()
                )));
            }
        }
        *label = m.predict_raw(row);
        Ok(())
    })
}

/// Writes the model as JSON into a new string owned by the caller.
///
/// # Safety
/// `json` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn cb_model_to_json(model: *const CbModel, json: *mut *mut c_char) -> CbStatus {
    guard(|| {
        let m = &handle(model, "model")?.0;
        if json.is_null() {
            return Err(Failure(CbStatus::NullArgument, "json is null".into()));
        }
        *json = CString::new(m.to_json()).expect("json has no nul").into_raw();
        Ok(())
    })
}

/// Parses a model written by [`cb_model_to_json`] or the CLI.
///
/// # Safety
/// `json` must be NUL-terminated; `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn cb_model_from_json(json: *const c_char, out: *mut *mut CbModel) -> CbStatus {
    guard(|| {
        let m = BoostedModel::from_json(str_arg(json, "json")?)?;
        put(out, CbModel(m))
    })
}

/// # Safety
/// `model` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cb_model_free(model: *mut CbModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `s` must be NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
