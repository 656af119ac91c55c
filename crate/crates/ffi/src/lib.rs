//! C interface to the `ralmc` model checker.
//!
//! Every call returns a [`RalmcStatus`]; on failure the message is kept in a
//! thread-local buffer readable through [`ralmc_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ralmc::model::{parse_formula, parse_rbm, validate_irbm, Endowment, Rbm};
use ralmc::ral::ral_check;
use ralmc::Error;

/// Opaque handle to a parsed and validated model.
pub struct RalmcModel {
    inner: Rbm,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RalmcStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Syntax = 3,
    InvalidModel = 4,
    Unsupported = 5,
    UnknownName = 6,
    CheckFailed = 7,
    Panic = 8,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> RalmcStatus {
    match e {
        Error::Syntax { .. } => RalmcStatus::Syntax,
        Error::Validation(_) => RalmcStatus::InvalidModel,
        Error::MultipleResources => RalmcStatus::Unsupported,
        Error::UnknownAgent(_) | Error::UnknownState(_) | Error::UnknownProposition(_) => {
            RalmcStatus::UnknownName
        }
        _ => RalmcStatus::CheckFailed,
    }
}

fn fail(status: RalmcStatus, msg: String) -> RalmcStatus {
    set_error(msg);
    status
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, RalmcStatus> {
    if p.is_null() {
        return Err(fail(RalmcStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(RalmcStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

fn guarded(body: impl FnOnce() -> RalmcStatus) -> RalmcStatus {
    clear_error();
    catch_unwind(AssertUnwindSafe(body))
        .unwrap_or_else(|_| fail(RalmcStatus::Panic, "internal panic".into()))
}

/// Parses a model in `.rbm` text form. On success `*out` owns a new handle
/// that must be released with [`ralmc_model_free`].
///
/// # Safety
/// `source` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ralmc_model_parse(source: *const c_char, out: *mut *mut RalmcModel) -> RalmcStatus {
    guarded(|| {
        if out.is_null() {
            return fail(RalmcStatus::NullArgument, "out is null".into());
        }
        *out = ptr::null_mut();
        let src = match text(source, "source") {
            Ok(s) => s,
            Err(s) => return s,
        };
        match parse_rbm(src) {
            Ok(m) => {
                *out = Box::into_raw(Box::new(RalmcModel { inner: m }));
                RalmcStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `model` must come from [`ralmc_model_parse`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ralmc_model_free(model: *mut RalmcModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Whether every agent can idle at zero cost everywhere.
///
/// # Safety
/// `model` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ralmc_model_is_irbm(model: *const RalmcModel) -> bool {
    model.as_ref().is_some_and(|m| validate_irbm(&m.inner))
}

/// Decides `formula` at `state` (null selects the initial state) with the
/// given endowment, writing the verdict to `*verdict`.
///
/// # Safety
/// Strings must be nul-terminated, `model` a live handle, `verdict` valid.
#[no_mangle]
pub unsafe extern "C" fn ralmc_check(
    model: *const RalmcModel,
    state: *const c_char,
    endowment: u64,
    formula: *const c_char,
    verdict: *mut bool,
) -> RalmcStatus {
    guarded(|| {
        let m = match model.as_ref() {
            Some(m) => &m.inner,
            None => return fail(RalmcStatus::NullArgument, "model is null".into()),
        };
        if verdict.is_null() {
            return fail(RalmcStatus::NullArgument, "verdict is null".into());
        }
        let q = if state.is_null() {
            m.init
        } else {
            let name = match text(state, "state") {
                Ok(s) => s,
                Err(s) => return s,
            };
            match m.state_index(name) {
                Some(q) => q,
                None => {
                    let e = Error::UnknownState(name.into());
                    return fail(status_of(&e), e.to_string());
                }
            }
        };
        let f = match text(formula, "formula") {
            Ok(s) => s,
            Err(s) => return s,
        };
        let result = parse_formula(f).and_then(|f| ral_check(m, q, Endowment(endowment), &f));
        match result {
            Ok(v) => {
                *verdict = v;
                RalmcStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ralmc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}
