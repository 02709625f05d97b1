//! C interface to `degenwave`.
//!
//! Scenarios are opaque handles built from TOML text. Every call returns a
//! [`DwStatus`]; on failure `dw_last_error` describes the problem. Strings
//! handed out by the library are released with `dw_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use degenwave::analysis::to_json_string;
use degenwave::cli::{exit_code, Scenario, ScenarioConfig, EXIT_CONFIG, EXIT_HYPOTHESIS};
use degenwave::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DwStatus {
    Ok = 0,
    ConfigError = 1,
    HypothesisViolation = 2,
    NumericalFailure = 3,
    NullArgument = 4,
    InvalidUtf8 = 5,
    Panic = 6,
}

/// Opaque scenario handle.
pub struct DwScenario {
    inner: Scenario,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> DwStatus {
    match exit_code(e) {
        EXIT_CONFIG => DwStatus::ConfigError,
        EXIT_HYPOTHESIS => DwStatus::HypothesisViolation,
        _ => DwStatus::NumericalFailure,
    }
}

enum Failure {
    Status(DwStatus, String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DwStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DwStatus::Ok,
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            DwStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Status(DwStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Status(DwStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn handle<'a>(h: *const DwScenario) -> Result<&'a Scenario, Failure> {
    h.as_ref()
        .map(|s| &s.inner)
        .ok_or_else(|| Failure::Status(DwStatus::NullArgument, "scenario handle is null".into()))
}

fn null_out(what: &str) -> Failure {
    Failure::Status(DwStatus::NullArgument, format!("{what} is null"))
}

unsafe fn give_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null_out("output pointer"));
    }
    let c = CString::new(s).map_err(|_| Failure::Status(DwStatus::NumericalFailure, "NUL in output".into()))?;
    *out = c.into_raw();
    Ok(())
}

/// Parses a TOML scenario. `base_dir` resolves relative table paths and may be null.
///
/// # Safety
/// `config_toml` and a non-null `base_dir` must be NUL-terminated strings;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dw_scenario_new(
    config_toml: *const c_char,
    base_dir: *const c_char,
    out: *mut *mut DwScenario,
) -> DwStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_out("out"));
        }
        *out = ptr::null_mut();
        let text = read_str(config_toml, "config")?;
        let base = if base_dir.is_null() { PathBuf::from(".") } else { PathBuf::from(read_str(base_dir, "base_dir")?) };
        let cfg = ScenarioConfig::parse(text, &base)?;
        let inner = Scenario::new(cfg)?;
        *out = Box::into_raw(Box::new(DwScenario { inner }));
        Ok(())
    })
}

/// # Safety
/// `h` must come from `dw_scenario_new` and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn dw_scenario_free(h: *mut DwScenario) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Degeneracy constant `K` and drift margin `eps0`. Either output may be null.
///
/// # Safety
/// `h` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dw_scenario_degeneracy(h: *const DwScenario, k: *mut f64, eps0: *mut f64) -> DwStatus {
    guard(|| {
        let hyp = handle(h)?.hypotheses();
        if !k.is_null() {
            *k = hyp.k;
        }
        if !eps0.is_null() {
            *eps0 = hyp.eps0;
        }
        Ok(())
    })
}

/// Hypothesis report as JSON.
///
/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dw_scenario_classify_json(h: *const DwScenario, out: *mut *mut c_char) -> DwStatus {
    guard(|| give_string(out, to_json_string(handle(h)?.hypotheses())))
}

/// Function-space constants as JSON.
///
/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dw_scenario_check_json(h: *const DwScenario, out: *mut *mut c_char) -> DwStatus {
    guard(|| {
        let report = handle(h)?.check()?;
        give_string(out, to_json_string(&report))
    })
}

/// Full stability report as JSON.
///
/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dw_scenario_report_json(h: *const DwScenario, out: *mut *mut c_char) -> DwStatus {
    guard(|| {
        let run = handle(h)?.report()?;
        give_string(out, to_json_string(&run.report))
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dw_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn dw_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn dw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cstr(s: &str) -> CString {
        CString::new(s).unwrap()
    }

    #[test]
    fn null_arguments() {
        unsafe {
            let mut h = ptr::null_mut();
            assert_eq!(dw_scenario_new(ptr::null(), ptr::null(), &mut h), DwStatus::NullArgument);
            assert!(h.is_null());
            assert!(!dw_last_error().is_null());
            let mut s = ptr::null_mut();
            assert_eq!(dw_scenario_classify_json(ptr::null(), &mut s), DwStatus::NullArgument);
            dw_scenario_free(ptr::null_mut());
            dw_string_free(ptr::null_mut());
        }
    }

    #[test]
    fn unknown_key_is_a_config_error() {
        let text = cstr("[coefficients]\nkind = \"power\"\nK_exp = 0.5\nzzz = 1\n");
        unsafe {
            let mut h = ptr::null_mut();
            assert_eq!(dw_scenario_new(text.as_ptr(), ptr::null(), &mut h), DwStatus::ConfigError);
            let msg = CStr::from_ptr(dw_last_error()).to_str().unwrap();
            assert!(msg.contains("zzz"), "{msg}");
        }
    }

    #[test]
    fn version_is_nul_terminated() {
        let v = unsafe { CStr::from_ptr(dw_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
