//! C bindings for aurcase.
//!
//! Documents are opaque handles created by [`aurcase_document_parse`] and
//! released with [`aurcase_document_free`]. Every fallible function returns
//! an [`AurcaseStatus`]; on failure [`aurcase_last_error_message`] describes
//! the cause. Strings handed out by the library are NUL-terminated UTF-8 and
//! must be released with [`aurcase_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use aurcase::dsl::{parse_bytes, serialize, ParseResult};
use aurcase::lifecycle::{rate_upper_bound, readiness_review, ExposureLedger};
use aurcase::report::{trace_matrix, CoverageSection, DiagnosticsSection};
use aurcase::validator::{validate_parsed, RuleConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AurcaseStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// The document could not be parsed; its diagnostics are still available.
    ParseFailed = 3,
    /// A numeric argument is outside its domain.
    Domain = 4,
    /// The operation needs a document whose references all resolve.
    Unresolved = 5,
    /// A configuration or ledger text was rejected.
    InvalidInput = 6,
    Internal = 7,
}

/// A parsed document.
pub struct AurcaseDocument {
    parsed: ParseResult,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(AurcaseStatus, String);

fn set_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AurcaseStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            AurcaseStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(&message);
            status
        }
        Err(_) => {
            set_error("internal error");
            AurcaseStatus::Internal
        }
    }
}

unsafe fn opt_str<'a>(s: *const c_char, what: &str) -> Result<Option<&'a str>, Failure> {
    if s.is_null() {
        return Ok(None);
    }
    CStr::from_ptr(s)
        .to_str()
        .map(Some)
        .map_err(|_| Failure(AurcaseStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn req_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    opt_str(s, what)?.ok_or_else(|| Failure(AurcaseStatus::NullPointer, format!("{what} is null")))
}

unsafe fn doc<'a>(d: *const AurcaseDocument) -> Result<&'a AurcaseDocument, Failure> {
    d.as_ref().ok_or_else(|| Failure(AurcaseStatus::NullPointer, "document is null".into()))
}

fn config(text: Option<&str>) -> Result<RuleConfig, Failure> {
    match text {
        Some(t) => RuleConfig::parse(t).map_err(|e| Failure(AurcaseStatus::InvalidInput, e.to_string())),
        None => Ok(RuleConfig::default()),
    }
}

unsafe fn hand_out(out: *mut *mut c_char, text: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(AurcaseStatus::NullPointer, "output pointer is null".into()));
    }
    let c = CString::new(text).map_err(|_| Failure(AurcaseStatus::Internal, "output contains NUL".into()))?;
    *out = c.into_raw();
    Ok(())
}

fn json<T: serde::Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string(value).map_err(|e| Failure(AurcaseStatus::Internal, e.to_string()))
}

fn resolved_case(d: &AurcaseDocument) -> Result<&aurcase::model::SafetyCase, Failure> {
    let case = d
        .parsed
        .case
        .as_ref()
        .ok_or_else(|| Failure(AurcaseStatus::ParseFailed, "document did not parse".into()))?;
    case.ensure_resolved().map_err(|e| Failure(AurcaseStatus::Unresolved, e.to_string()))?;
    Ok(case)
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn aurcase_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failure on this thread; empty after a success. The
/// pointer stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn aurcase_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parse `len` bytes of document text. On `Ok` and on `ParseFailed` a
/// document is stored in `*out` and must be freed by the caller.
///
/// # Safety
/// `text` must point to `len` readable bytes; `file_name` must be null or a
/// NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aurcase_document_parse(
    text: *const u8,
    len: usize,
    file_name: *const c_char,
    out: *mut *mut AurcaseDocument,
) -> AurcaseStatus {
    guard(|| {
        if text.is_null() || out.is_null() {
            return Err(Failure(AurcaseStatus::NullPointer, "text or output pointer is null".into()));
        }
        let name = opt_str(file_name, "file name")?.unwrap_or("<input>");
        let bytes = std::slice::from_raw_parts(text, len);
        let parsed = parse_bytes(bytes, name);
        let fatal = parsed.is_fatal();
        let first = parsed.diagnostics.first().map(|d| d.message.clone()).unwrap_or_default();
        *out = Box::into_raw(Box::new(AurcaseDocument { parsed }));
        if fatal {
            Err(Failure(AurcaseStatus::ParseFailed, first))
        } else {
            Ok(())
        }
    })
}

/// # Safety
/// `document` must be null or a handle from [`aurcase_document_parse`] not
/// yet freed.
#[no_mangle]
pub unsafe extern "C" fn aurcase_document_free(document: *mut AurcaseDocument) {
    if !document.is_null() {
        drop(Box::from_raw(document));
    }
}

/// Diagnostics as JSON (`errors`, `warnings`, `items`). `config` is null or
/// rule configuration text.
///
/// # Safety
/// Pointers as documented on the module.
#[no_mangle]
pub unsafe extern "C" fn aurcase_document_check_json(
    document: *const AurcaseDocument,
    config_text: *const c_char,
    out: *mut *mut c_char,
) -> AurcaseStatus {
    guard(|| {
        let d = doc(document)?;
        let config = config(opt_str(config_text, "config")?)?;
        let diagnostics = validate_parsed(&d.parsed, &config);
        hand_out(out, json(&DiagnosticsSection::of(&diagnostics))?)
    })
}

/// Coverage of the behavioral space as JSON.
///
/// # Safety
/// Pointers as documented on the module.
#[no_mangle]
pub unsafe extern "C" fn aurcase_document_coverage_json(
    document: *const AurcaseDocument,
    out: *mut *mut c_char,
) -> AurcaseStatus {
    guard(|| {
        let case = resolved_case(doc(document)?)?;
        hand_out(out, json(&CoverageSection::of(case))?)
    })
}

/// Traceability matrix as JSON.
///
/// # Safety
/// Pointers as documented on the module.
#[no_mangle]
pub unsafe extern "C" fn aurcase_document_trace_json(
    document: *const AurcaseDocument,
    out: *mut *mut c_char,
) -> AurcaseStatus {
    guard(|| {
        let case = resolved_case(doc(document)?)?;
        hand_out(out, json(&trace_matrix(case))?)
    })
}

/// Canonical document text.
///
/// # Safety
/// Pointers as documented on the module.
#[no_mangle]
pub unsafe extern "C" fn aurcase_document_serialize(
    document: *const AurcaseDocument,
    out: *mut *mut c_char,
) -> AurcaseStatus {
    guard(|| {
        let case = resolved_case(doc(document)?)?;
        hand_out(out, serialize(case))
    })
}

/// Readiness decision as JSON for the given ledger text.
///
/// # Safety
/// Pointers as documented on the module.
#[no_mangle]
pub unsafe extern "C" fn aurcase_document_review_json(
    document: *const AurcaseDocument,
    ledger_text: *const c_char,
    config_text: *const c_char,
    out: *mut *mut c_char,
) -> AurcaseStatus {
    guard(|| {
        let case = resolved_case(doc(document)?)?;
        let ledger = ExposureLedger::parse(req_str(ledger_text, "ledger")?)
            .map_err(|e| Failure(AurcaseStatus::InvalidInput, e.to_string()))?;
        let config = config(opt_str(config_text, "config")?)?;
        hand_out(out, json(&readiness_review(case, &ledger, &config))?)
    })
}

/// Exact one-sided upper confidence bound on an event rate.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aurcase_rate_upper_bound(
    count: u64,
    exposure: f64,
    confidence: f64,
    out: *mut f64,
) -> AurcaseStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure(AurcaseStatus::NullPointer, "output pointer is null".into()));
        }
        *out = rate_upper_bound(count, exposure, confidence).map_err(|e| Failure(AurcaseStatus::Domain, e.to_string()))?;
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn aurcase_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
