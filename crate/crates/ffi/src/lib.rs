//! C ABI over the analyzer.
//!
//! Diagrams cross the boundary as opaque `NegotDiagram` handles. Every
//! fallible call returns a `NegotStatus`; on failure a message is kept per
//! thread and can be read with `negot_last_error`. Strings handed out by the
//! library are owned by the caller and released with `negot_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use negot::io::report::{analyze, check, AnalyzeOptions, FrameworkRequest};
use negot::io::{emit_dot, parse, render};
use negot::Diagram;

/// Result codes of every fallible call.
#[repr(C)]
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum NegotStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidArgument = 4,
    Unsound = 5,
    Inconclusive = 6,
    EngineError = 7,
    FrameworkError = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum NegotSoundness {
    Sound = 0,
    Unsound = 1,
    LimitExceeded = 2,
}

/// A parsed, validated diagram.
pub struct NegotDiagram {
    inner: Diagram,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: NegotStatus, msg: impl Into<String>) -> NegotStatus {
    set_error(msg);
    status
}

/// Runs `f`, turning panics into `NegotStatus::Panic`.
fn guarded(f: impl FnOnce() -> NegotStatus) -> NegotStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            fail(NegotStatus::Panic, msg)
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, NegotStatus> {
    if p.is_null() {
        return Err(fail(NegotStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(NegotStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn diagram<'a>(d: *const NegotDiagram) -> Result<&'a Diagram, NegotStatus> {
    d.as_ref().map(|h| &h.inner).ok_or_else(|| fail(NegotStatus::NullArgument, "diagram handle is null"))
}

unsafe fn give_string(text: String, out: *mut *mut c_char) -> NegotStatus {
    if out.is_null() {
        return fail(NegotStatus::NullArgument, "output pointer is null");
    }
    match CString::new(text) {
        Ok(s) => {
            *out = s.into_raw();
            NegotStatus::Ok
        }
        Err(_) => fail(NegotStatus::InvalidArgument, "output contains a NUL byte"),
    }
}

/// The library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn negot_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// The message of the last failed call on this thread, or NULL. Valid until
/// the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn negot_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses diagram source text. On success `*out` receives a handle to be
/// released with `negot_diagram_free`.
///
/// # Safety
/// `text` must be NULL or a NUL-terminated string; `out` must be NULL or
/// point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn negot_diagram_parse(text: *const c_char, out: *mut *mut NegotDiagram) -> NegotStatus {
    guarded(|| {
        if out.is_null() {
            return fail(NegotStatus::NullArgument, "output pointer is null");
        }
        *out = ptr::null_mut();
        let text = match read_str(text, "text") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse(text) {
            Ok(d) => {
                *out = Box::into_raw(Box::new(NegotDiagram { inner: d }));
                NegotStatus::Ok
            }
            Err(e) => fail(NegotStatus::ParseError, e.to_string()),
        }
    })
}

/// Releases a handle; NULL is ignored.
///
/// # Safety
/// `d` must be NULL or a handle from `negot_diagram_parse` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn negot_diagram_free(d: *mut NegotDiagram) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Number of nodes, or 0 for a NULL handle.
///
/// # Safety
/// `d` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn negot_diagram_node_count(d: *const NegotDiagram) -> usize {
    d.as_ref().map_or(0, |h| h.inner.nodes.len())
}

/// Number of processes, or 0 for a NULL handle.
///
/// # Safety
/// `d` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn negot_diagram_process_count(d: *const NegotDiagram) -> usize {
    d.as_ref().map_or(0, |h| h.inner.process_count())
}

/// Determinism and soundness. `max_configs` 0 selects the default cap.
/// Either output pointer may be NULL.
///
/// # Safety
/// `d` must be a live handle; non-NULL outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn negot_check(
    d: *const NegotDiagram,
    max_configs: usize,
    deterministic: *mut c_int,
    soundness: *mut NegotSoundness,
) -> NegotStatus {
    guarded(|| {
        let d = match diagram(d) {
            Ok(d) => d,
            Err(s) => return s,
        };
        let cap = if max_configs == 0 { negot::soundness::max_configs_from_env() } else { max_configs };
        let r = check(d, cap);
        if !deterministic.is_null() {
            *deterministic = c_int::from(r.determinism.deterministic);
        }
        if !soundness.is_null() {
            *soundness = match r.soundness.status.as_str() {
                "sound" => NegotSoundness::Sound,
                "unsound" => NegotSoundness::Unsound,
                _ => NegotSoundness::LimitExceeded,
            };
        }
        NegotStatus::Ok
    })
}

fn parse_params(text: &str) -> Vec<(String, String)> {
    text.split(';')
        .filter_map(|kv| kv.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect()
}

/// Runs an analysis and writes the JSON report to `*out_json`.
///
/// `framework` is `expected-cost`, `worst-time` or `genkill`; NULL uses the
/// diagram's first analysis block. `params` holds `key=value` pairs
/// separated by `;` (e.g. `variant=may-forward;gen=n3.b;loc=n7.a`) and may
/// be NULL. The report is written whenever the request itself was valid,
/// even if the analysis failed; the status then says why.
///
/// # Safety
/// `d` must be a live handle; strings must be NULL or NUL-terminated;
/// `out_json` must point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn negot_analyze_json(
    d: *const NegotDiagram,
    framework: *const c_char,
    params: *const c_char,
    oracle_check: c_int,
    out_json: *mut *mut c_char,
) -> NegotStatus {
    guarded(|| {
        if out_json.is_null() {
            return fail(NegotStatus::NullArgument, "output pointer is null");
        }
        *out_json = ptr::null_mut();
        let d = match diagram(d) {
            Ok(d) => d,
            Err(s) => return s,
        };
        let params = if params.is_null() {
            Vec::new()
        } else {
            match read_str(params, "params") {
                Ok(p) => parse_params(p),
                Err(s) => return s,
            }
        };
        let request = if framework.is_null() {
            match d.analyses.first() {
                Some(block) => FrameworkRequest::from_block(block),
                None => Err("no framework given and the diagram has no analysis block".to_string()),
            }
        } else {
            match read_str(framework, "framework") {
                Ok(id) => FrameworkRequest::from_parts(id, |k| {
                    params.iter().find(|(key, _)| key == k).map(|(_, v)| v.clone())
                }),
                Err(s) => return s,
            }
        };
        let request = match request {
            Ok(r) => r,
            Err(e) => return fail(NegotStatus::InvalidArgument, e),
        };
        let opts = AnalyzeOptions { oracle_check: oracle_check != 0, ..AnalyzeOptions::default() };
        let report = analyze(d, &request, &opts);
        let json = serde_json::to_string(&report).expect("reports serialise");
        let written = give_string(json, out_json);
        if written != NegotStatus::Ok {
            return written;
        }
        match &report.error {
            None => NegotStatus::Ok,
            Some(e) => {
                let status = match e.kind.as_str() {
                    "unsound" => NegotStatus::Unsound,
                    "framework" => NegotStatus::FrameworkError,
                    _ if report.soundness.status == "limit-exceeded" => NegotStatus::Inconclusive,
                    _ => NegotStatus::EngineError,
                };
                fail(status, e.message.clone())
            }
        }
    })
}

/// Graphviz rendering of the diagram.
///
/// # Safety
/// `d` must be a live handle; `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn negot_diagram_to_dot(d: *const NegotDiagram, out: *mut *mut c_char) -> NegotStatus {
    guarded(|| match diagram(d) {
        Ok(d) => give_string(emit_dot(d), out),
        Err(s) => s,
    })
}

/// Canonical source text of the diagram.
///
/// # Safety
/// `d` must be a live handle; `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn negot_diagram_render(d: *const NegotDiagram, out: *mut *mut c_char) -> NegotStatus {
    guarded(|| match diagram(d) {
        Ok(d) => give_string(render(d), out),
        Err(s) => s,
    })
}

/// Releases a string returned by the library; NULL is ignored.
///
/// # Safety
/// `s` must be NULL or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn negot_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
