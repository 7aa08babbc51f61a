//! C interface to gspec.
//!
//! Objects are opaque handles created by `*_from_*` functions and released
//! with the matching `*_free`. Functions that can fail return a
//! [`GspecStatus`]; the message of the last failure on the calling thread is
//! available from [`gspec_last_error`]. Strings passed in must be NUL
//! terminated UTF-8. Strings returned are owned by the library.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::time::Duration;

use gspec::pipeline::{ParseOptions, Parser};
use gspec::{Error, Grammar, Lattice, PruneModel, SpecializedGrammar};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GspecStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed or inconsistent input text.
    ParseError = 3,
    /// Parsing finished without an analysis. A result is still returned.
    NoParse = 4,
    /// Parsing ran out of time. A result is still returned.
    Timeout = 5,
    InvalidArgument = 6,
    Io = 7,
    Panic = 8,
}

pub struct GspecGrammar(Grammar);

pub struct GspecModel(PruneModel);

pub struct GspecSpecialized(SpecializedGrammar);

pub struct GspecResult {
    analyses: Vec<CString>,
    scores: Vec<f64>,
    timed_out: bool,
}

/// Options for [`gspec_parse_text`]. Obtain defaults from
/// [`gspec_parse_options_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct GspecParseOptions {
    pub prune: bool,
    pub use_specialized: bool,
    pub fraction_phase1: f64,
    pub fraction_phase2: f64,
    /// Seconds; zero or less disables the limit.
    pub timeout_seconds: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).expect("NUL removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> GspecStatus {
    match e {
        Error::Timeout(_) => GspecStatus::Timeout,
        Error::Config(_) | Error::GrammarMismatch { .. } => GspecStatus::InvalidArgument,
        Error::Io { .. } => GspecStatus::Io,
        _ => GspecStatus::ParseError,
    }
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<GspecStatus, (GspecStatus, String)>) -> GspecStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err((s, message))) => {
            set_error(&message);
            s
        }
        Err(_) => {
            set_error("internal panic");
            GspecStatus::Panic
        }
    }
}

fn fail(e: Error) -> (GspecStatus, String) {
    (status_of(&e), e.to_string())
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (GspecStatus, String)> {
    if p.is_null() {
        return Err((GspecStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        (
            GspecStatus::InvalidUtf8,
            format!("{what} is not valid UTF-8"),
        )
    })
}

fn check_out<T>(out: *mut *mut T) -> Result<(), (GspecStatus, String)> {
    if out.is_null() {
        Err((GspecStatus::NullPointer, "output pointer is null".into()))
    } else {
        Ok(())
    }
}

/// Message of the last failure on this thread; empty if none. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gspec_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn gspec_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a grammar file's text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gspec_grammar_from_str(
    text: *const c_char,
    out: *mut *mut GspecGrammar,
) -> GspecStatus {
    guard(|| {
        check_out(out)?;
        let g = Grammar::parse(read_str(text, "grammar text")?).map_err(fail)?;
        *out = Box::into_raw(Box::new(GspecGrammar(g)));
        Ok(GspecStatus::Ok)
    })
}

/// # Safety
/// `grammar` must come from [`gspec_grammar_from_str`] or be null.
#[no_mangle]
pub unsafe extern "C" fn gspec_grammar_free(grammar: *mut GspecGrammar) {
    if !grammar.is_null() {
        drop(Box::from_raw(grammar));
    }
}

/// Number of rules in the grammar, or 0 for a null handle.
///
/// # Safety
/// `grammar` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn gspec_grammar_rule_count(grammar: *const GspecGrammar) -> usize {
    grammar.as_ref().map_or(0, |g| g.0.rules().len())
}

/// Parses a pruning model file's text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gspec_model_from_str(
    text: *const c_char,
    out: *mut *mut GspecModel,
) -> GspecStatus {
    guard(|| {
        check_out(out)?;
        let m = PruneModel::parse(read_str(text, "model text")?).map_err(fail)?;
        *out = Box::into_raw(Box::new(GspecModel(m)));
        Ok(GspecStatus::Ok)
    })
}

/// # Safety
/// `model` must come from [`gspec_model_from_str`] or be null.
#[no_mangle]
pub unsafe extern "C" fn gspec_model_free(model: *mut GspecModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Parses a specialized grammar file's text. It must have been built from
/// `grammar`.
///
/// # Safety
/// `text` must be a NUL-terminated string, `grammar` a live handle and `out`
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gspec_specialized_from_str(
    text: *const c_char,
    grammar: *const GspecGrammar,
    out: *mut *mut GspecSpecialized,
) -> GspecStatus {
    guard(|| {
        check_out(out)?;
        let g = grammar
            .as_ref()
            .ok_or((GspecStatus::NullPointer, "grammar is null".to_string()))?;
        let sg = SpecializedGrammar::parse(read_str(text, "specialized grammar text")?, &g.0)
            .map_err(fail)?;
        *out = Box::into_raw(Box::new(GspecSpecialized(sg)));
        Ok(GspecStatus::Ok)
    })
}

/// # Safety
/// `sg` must come from [`gspec_specialized_from_str`] or be null.
#[no_mangle]
pub unsafe extern "C" fn gspec_specialized_free(sg: *mut GspecSpecialized) {
    if !sg.is_null() {
        drop(Box::from_raw(sg));
    }
}

#[no_mangle]
pub extern "C" fn gspec_parse_options_default() -> GspecParseOptions {
    let d = ParseOptions::default();
    GspecParseOptions {
        prune: d.prune,
        use_specialized: d.specialized,
        fraction_phase1: d.fraction_phase1,
        fraction_phase2: d.fraction_phase2,
        timeout_seconds: d.timeout.map_or(0.0, |t| t.as_secs_f64()),
    }
}

/// Parses a whitespace-separated sentence. `model` and `specialized` may be
/// null unless the options ask for them; `options` may be null for defaults.
/// On `Ok`, `NoParse` and `Timeout` a result is stored in `out`.
///
/// # Safety
/// Pointers must be null or valid as described; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gspec_parse_text(
    grammar: *const GspecGrammar,
    model: *const GspecModel,
    specialized: *const GspecSpecialized,
    text: *const c_char,
    options: *const GspecParseOptions,
    out: *mut *mut GspecResult,
) -> GspecStatus {
    guard(|| {
        check_out(out)?;
        let g = grammar
            .as_ref()
            .ok_or((GspecStatus::NullPointer, "grammar is null".to_string()))?;
        let o = options
            .as_ref()
            .copied()
            .unwrap_or_else(|| gspec_parse_options_default());
        let opts = ParseOptions {
            prune: o.prune,
            specialized: o.use_specialized,
            fraction_phase1: o.fraction_phase1,
            fraction_phase2: o.fraction_phase2,
            timeout: (o.timeout_seconds > 0.0 && o.timeout_seconds.is_finite())
                .then(|| Duration::from_secs_f64(o.timeout_seconds)),
        };
        let lattice = Lattice::from_text("input", read_str(text, "text")?).map_err(fail)?;
        let parser = Parser::new(
            &g.0,
            model.as_ref().map(|m| &m.0),
            specialized.as_ref().map(|s| &s.0),
        )
        .map_err(fail)?;
        let outcome = parser.parse(&lattice, &opts).map_err(fail)?;
        let result = GspecResult {
            analyses: outcome
                .analyses
                .iter()
                .map(|a| CString::new(a.derivation.to_sexpr()).expect("no NUL in derivations"))
                .collect(),
            scores: outcome.analyses.iter().map(|a| a.score).collect(),
            timed_out: outcome.timed_out,
        };
        let status = if result.timed_out {
            GspecStatus::Timeout
        } else if result.analyses.is_empty() {
            GspecStatus::NoParse
        } else {
            GspecStatus::Ok
        };
        *out = Box::into_raw(Box::new(result));
        Ok(status)
    })
}

/// Number of analyses, or 0 for a null handle.
///
/// # Safety
/// `result` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn gspec_result_count(result: *const GspecResult) -> usize {
    result.as_ref().map_or(0, |r| r.analyses.len())
}

/// The `index`-th analysis as a bracketed derivation, best first; null if
/// out of range. Owned by the result.
///
/// # Safety
/// `result` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn gspec_result_analysis(
    result: *const GspecResult,
    index: usize,
) -> *const c_char {
    result
        .as_ref()
        .and_then(|r| r.analyses.get(index))
        .map_or(ptr::null(), |s| s.as_ptr())
}

/// Score of the `index`-th analysis; NaN if out of range.
///
/// # Safety
/// `result` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn gspec_result_score(result: *const GspecResult, index: usize) -> f64 {
    result
        .as_ref()
        .and_then(|r| r.scores.get(index))
        .copied()
        .unwrap_or(f64::NAN)
}

/// # Safety
/// `result` must come from [`gspec_parse_text`] or be null.
#[no_mangle]
pub unsafe extern "C" fn gspec_result_free(result: *mut GspecResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}
