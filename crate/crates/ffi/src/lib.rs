//! C ABI over `yamabe_core`.
//!
//! Specs and reports are opaque handles owned by the caller and released
//! with the matching `*_free` function. Every entry point returns a
//! [`YamabeStatus`]; on failure the message is available from
//! [`yamabe_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use yamabe_core::dsl::SpecDocument;
use yamabe_core::families::{catalog, lambert_w, Branch};
use yamabe_core::soliton::{certify_with, CertifyOptions, ResidualReport, WarpedSolitonSpec};
use yamabe_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YamabeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    InvalidDocument = 4,
    Domain = 5,
    Numerical = 6,
    Panic = 7,
}

/// Opaque soliton specification.
pub struct YamabeSpec {
    inner: WarpedSolitonSpec,
}

/// Opaque certification report.
pub struct YamabeReport {
    inner: ResidualReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> YamabeStatus {
    match e {
        Error::Document(_) => YamabeStatus::InvalidDocument,
        Error::InvalidArgument(_)
        | Error::InvalidSignature(_)
        | Error::DimensionMismatch { .. }
        | Error::DegenerateDirection
        | Error::Precondition(_) => YamabeStatus::InvalidArgument,
        Error::OutOfDomain { .. } | Error::LambertDomain { .. } | Error::NonPositive { .. } => YamabeStatus::Domain,
        _ => YamabeStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> Result<(), YamabeStatus>) -> YamabeStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => YamabeStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            YamabeStatus::Panic
        }
    }
}

fn fail(e: Error) -> YamabeStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

fn null(what: &str) -> YamabeStatus {
    set_error(format!("null pointer passed for {what}"));
    YamabeStatus::NullPointer
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, YamabeStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        YamabeStatus::InvalidUtf8
    })
}

/// Message of the last failure on this thread, or NULL. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn yamabe_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn yamabe_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a JSON spec document.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn yamabe_spec_from_json(json: *const c_char, out: *mut *mut YamabeSpec) -> YamabeStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = read_str(json, "json")?;
        let spec = SpecDocument::from_json(text).and_then(|d| d.build()).map_err(fail)?;
        *out = Box::into_raw(Box::new(YamabeSpec { inner: spec }));
        Ok(())
    })
}

/// Catalog example `k` in `1..=5`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn yamabe_spec_example(k: u32, out: *mut *mut YamabeSpec) -> YamabeStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let k = u8::try_from(k).map_err(|_| fail(Error::InvalidArgument(format!("unknown example {k}"))))?;
        let spec = catalog::example(k).map_err(fail)?;
        *out = Box::into_raw(Box::new(YamabeSpec { inner: spec }));
        Ok(())
    })
}

/// # Safety
/// `spec` must come from this library and not be freed twice. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn yamabe_spec_free(spec: *mut YamabeSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Certifies `spec` on `grid` points. A non-positive `tolerance` selects
/// the default for the profile kind.
///
/// # Safety
/// `spec` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn yamabe_certify(
    spec: *const YamabeSpec,
    grid: usize,
    tolerance: f64,
    out: *mut *mut YamabeReport,
) -> YamabeStatus {
    guard(|| {
        if spec.is_null() {
            return Err(null("spec"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let opts = CertifyOptions {
            grid,
            tolerance: (tolerance > 0.0).then_some(tolerance),
            ..CertifyOptions::default()
        };
        let report = certify_with(&(*spec).inner, &opts).map_err(fail)?;
        *out = Box::into_raw(Box::new(YamabeReport { inner: report }));
        Ok(())
    })
}

/// Verdict as its process exit code: 0 certified, 2 rejected, 3 inconclusive.
/// Returns -1 for NULL.
///
/// # Safety
/// `report` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn yamabe_report_verdict(report: *const YamabeReport) -> c_int {
    if report.is_null() {
        return -1;
    }
    (*report).inner.verdict.exit_code()
}

/// Report as JSON. Release the string with [`yamabe_string_free`].
///
/// # Safety
/// `report` must be a live handle. Returns NULL for NULL input.
#[no_mangle]
pub unsafe extern "C" fn yamabe_report_json(report: *const YamabeReport) -> *mut c_char {
    if report.is_null() {
        return ptr::null_mut();
    }
    CString::new((*report).inner.to_json()).map_or(ptr::null_mut(), CString::into_raw)
}

/// # Safety
/// `report` must come from this library and not be freed twice. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn yamabe_report_free(report: *mut YamabeReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `s` must come from this library and not be freed twice. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn yamabe_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Lambert W. `branch` 0 is the principal branch, -1 the lower one.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn yamabe_lambert_w(x: f64, branch: c_int, out: *mut f64) -> YamabeStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let b = match branch {
            0 => Branch::Principal,
            -1 => Branch::Lower,
            other => return Err(fail(Error::InvalidArgument(format!("branch must be 0 or -1, got {other}")))),
        };
        *out = lambert_w(x, b).map_err(fail)?;
        Ok(())
    })
}
