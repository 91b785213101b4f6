//! C interface to the interpreter, the hardening passes and the checker.
//!
//! Handles are opaque pointers owned by the caller and released with the
//! matching `_free` function. Strings returned through out-parameters are
//! allocated here and released with [`slh_string_free`]. Every entry point
//! returns an [`SlhStatus`]; on failure [`slh_last_error`] describes the
//! problem for the calling thread.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use slh_core::check::{check_relative_security, check_sct, Bounds, CheckError, StateSpace, Verdict};
use slh_core::fixtures::fixture;
use slh_core::flow::flow_track;
use slh_core::harden::Protection;
use slh_core::ideal::{IdealConfig, IdealKind};
use slh_core::label::{Label, LabelSpec, Labeling};
use slh_core::lang::{parse_com, pretty_com, Com};
use slh_core::machine::{run, OutcomeKind};
use slh_core::seq::{seq_run, SeqKind};
use slh_core::speculative::SpecConfig;
use slh_core::state::{parse_dirs, parse_state, render_trace, ArrayState, ScalarState};

/// Result code of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlhStatus {
    /// Success; for checks, the property holds.
    Ok = 0,
    /// The checked property is violated.
    Violated = 1,
    NullArgument = 2,
    InvalidUtf8 = 3,
    ParseError = 4,
    FormatError = 5,
    UnknownVariant = 6,
    HardenError = 7,
    CheckError = 8,
    UnknownListing = 9,
    /// The library panicked; this is a bug.
    Internal = 10,
}

/// How a run ended.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlhOutcome {
    Terminated = 0,
    Stuck = 1,
    FuelExhausted = 2,
    DirectivesExhausted = 3,
}

/// A parsed program.
pub struct SlhProgram {
    com: Com,
}

/// A labeling; names it does not mention are secret.
pub struct SlhLabeling {
    spec: Option<LabelSpec>,
}

impl SlhLabeling {
    fn resolve(&self, arrays: &BTreeSet<String>) -> Labeling {
        match &self.spec {
            Some(s) => s.resolve(arrays),
            None => Labeling::all_secret(),
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(SlhStatus, String);

type Res<T> = Result<T, Failure>;

fn fail<T>(status: SlhStatus, msg: impl Into<String>) -> Res<T> {
    Err(Failure(status, msg.into()))
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, records its error message and maps panics to `Internal`.
fn guard(f: impl FnOnce() -> Res<SlhStatus>) -> SlhStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            s
        }
        Ok(Err(Failure(s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("internal error");
            SlhStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Res<&'a str> {
    if p.is_null() {
        return fail(SlhStatus::NullArgument, format!("{what} is null"));
    }
    CStr::from_ptr(p).to_str().or_else(|_| fail(SlhStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn opt_text<'a>(p: *const c_char, what: &str) -> Res<Option<&'a str>> {
    if p.is_null() {
        Ok(None)
    } else {
        text(p, what).map(Some)
    }
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Res<&'a T> {
    p.as_ref().ok_or_else(|| Failure(SlhStatus::NullArgument, format!("{what} is null")))
}

unsafe fn put<T>(out: *mut T, v: T) -> Res<()> {
    if out.is_null() {
        return fail(SlhStatus::NullArgument, "output pointer is null");
    }
    out.write(v);
    Ok(())
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

fn verdict_status(v: &Verdict) -> SlhStatus {
    if v.holds() {
        SlhStatus::Ok
    } else {
        SlhStatus::Violated
    }
}

fn check_failure(e: CheckError) -> Failure {
    let status = match e {
        CheckError::Harden(_) => SlhStatus::HardenError,
        _ => SlhStatus::CheckError,
    };
    Failure(status, e.to_string())
}

fn protection(variant: &str) -> Res<Protection> {
    variant.parse().or_else(|e: String| fail(SlhStatus::UnknownVariant, e))
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn slh_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn slh_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses program text.
///
/// # Safety
/// `source` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn slh_program_parse(source: *const c_char, out: *mut *mut SlhProgram) -> SlhStatus {
    guard(|| {
        let src = text(source, "source")?;
        let com = parse_com(src).or_else(|e| fail(SlhStatus::ParseError, e.to_string()))?;
        put(out, Box::into_raw(Box::new(SlhProgram { com })))?;
        Ok(SlhStatus::Ok)
    })
}

/// # Safety
/// `p` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn slh_program_free(p: *mut SlhProgram) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Number of command nodes, or 0 for null.
///
/// # Safety
/// `p` must be null or a live program handle.
#[no_mangle]
pub unsafe extern "C" fn slh_program_size(p: *const SlhProgram) -> usize {
    p.as_ref().map_or(0, |p| p.com.size())
}

/// Pretty-prints a program.
///
/// # Safety
/// `p` must be a live program handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn slh_program_print(p: *const SlhProgram, out: *mut *mut c_char) -> SlhStatus {
    guard(|| {
        let p = handle(p, "program")?;
        put(out, c_string(pretty_com(&p.com)))?;
        Ok(SlhStatus::Ok)
    })
}

/// Parses a labeling file (`name: public` per line).
///
/// # Safety
/// `source` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn slh_labeling_parse(source: *const c_char, out: *mut *mut SlhLabeling) -> SlhStatus {
    guard(|| {
        let src = text(source, "source")?;
        let spec = LabelSpec::parse(src).or_else(|e| fail(SlhStatus::FormatError, e.to_string()))?;
        put(out, Box::into_raw(Box::new(SlhLabeling { spec: Some(spec) })))?;
        Ok(SlhStatus::Ok)
    })
}

/// A labeling under which every name is secret.
#[no_mangle]
pub extern "C" fn slh_labeling_all_secret() -> *mut SlhLabeling {
    Box::into_raw(Box::new(SlhLabeling { spec: None }))
}

/// # Safety
/// `l` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn slh_labeling_free(l: *mut SlhLabeling) {
    if !l.is_null() {
        drop(Box::from_raw(l));
    }
}

/// Hardens a program. `variant` is one of `none`, `islh`, `sislh`,
/// `sislh-no-store-mask`, `fislh`, `uslh`, `svslh`, `fvslh`, `fsfvslh`.
/// A null `labels` means all secret; a null `flag_var` means `b`.
///
/// # Safety
/// Pointers must be null where allowed or valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn slh_harden(
    p: *const SlhProgram,
    labels: *const SlhLabeling,
    variant: *const c_char,
    flag_var: *const c_char,
    out: *mut *mut SlhProgram,
) -> SlhStatus {
    guard(|| {
        let p = handle(p, "program")?;
        let prot = protection(text(variant, "variant")?)?;
        let flag = opt_text(flag_var, "flag variable")?.unwrap_or(slh_core::harden::DEFAULT_FLAG);
        let l = labels.as_ref().map_or_else(Labeling::all_secret, |l| l.resolve(&p.com.arrays()));
        let com = prot.apply(&p.com, &l, flag).or_else(|e| fail(SlhStatus::HardenError, e.to_string()))?;
        put(out, Box::into_raw(Box::new(SlhProgram { com })))?;
        Ok(SlhStatus::Ok)
    })
}

fn ideal_kind(sem: &str) -> Option<IdealKind> {
    sem.strip_prefix("ideal-").and_then(|k| k.parse().ok())
}

/// Runs a program and returns its trace as text, one observation per line.
/// `semantics` is `seq`, `spec`, `ideal-fislh`, `ideal-fvslh` or `ideal-fs`;
/// `directives` is ignored by `seq`. A null `labels` means all secret.
///
/// # Safety
/// Pointers must be null where allowed or valid; out-parameters must be
/// writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn slh_run(
    p: *const SlhProgram,
    labels: *const SlhLabeling,
    semantics: *const c_char,
    state: *const c_char,
    directives: *const c_char,
    misspeculating: bool,
    fuel: usize,
    out_outcome: *mut SlhOutcome,
    out_trace: *mut *mut c_char,
) -> SlhStatus {
    guard(|| {
        let p = handle(p, "program")?;
        let sem = text(semantics, "semantics")?;
        let (rho, mu): (ScalarState, ArrayState) = match opt_text(state, "state")? {
            Some(s) => parse_state(s).or_else(|e| fail(SlhStatus::FormatError, e.to_string()))?,
            None => Default::default(),
        };
        let dirs = parse_dirs(opt_text(directives, "directives")?.unwrap_or(""))
            .or_else(|e| fail(SlhStatus::FormatError, e.to_string()))?;
        let mut arrays = p.com.arrays();
        arrays.extend(mu.names().map(String::from));
        let l = labels.as_ref().map_or_else(Labeling::all_secret, |l| l.resolve(&arrays));
        let kind = |k: OutcomeKind| match k {
            OutcomeKind::Terminated => SlhOutcome::Terminated,
            OutcomeKind::Stuck => SlhOutcome::Stuck,
            OutcomeKind::FuelExhausted => SlhOutcome::FuelExhausted,
            OutcomeKind::DirectivesExhausted => SlhOutcome::DirectivesExhausted,
        };
        let (outcome, trace) = match sem {
            "seq" => {
                let o = seq_run(&p.com, &rho, &mu, fuel);
                let k = match o.kind {
                    SeqKind::Terminated => SlhOutcome::Terminated,
                    SeqKind::Stuck => SlhOutcome::Stuck,
                    SeqKind::FuelExhausted => SlhOutcome::FuelExhausted,
                };
                (k, o.trace)
            }
            "spec" => {
                let cfg = SpecConfig { com: p.com.clone(), rho, mu, flag: misspeculating };
                let o = run(cfg, &dirs, fuel);
                (kind(o.kind), o.trace)
            }
            s => {
                let k = ideal_kind(s).ok_or_else(|| Failure(SlhStatus::UnknownVariant, format!("unknown semantics `{s}`")))?;
                let cfg = match k {
                    IdealKind::Fs => {
                        let (a, _) = flow_track(&p.com, &l, Label::Public);
                        IdealConfig::flow_sensitive(a, l, Label::Public, rho, mu, misspeculating)
                    }
                    k => IdealConfig::of_com(k, &p.com, &l, rho, mu, misspeculating),
                };
                let o = run(cfg, &dirs, fuel);
                (kind(o.kind), o.trace)
            }
        };
        put(out_outcome, outcome)?;
        put(out_trace, c_string(render_trace(&trace)))?;
        Ok(SlhStatus::Ok)
    })
}

unsafe fn space_and_labels(
    p: &SlhProgram,
    labels: *const SlhLabeling,
    space: *const c_char,
) -> Res<(StateSpace, Labeling)> {
    let space = StateSpace::parse(text(space, "state space")?).or_else(|e| fail(SlhStatus::FormatError, e.to_string()))?;
    let mut arrays = p.com.arrays();
    arrays.extend(space.arrays.keys().cloned());
    let l = labels.as_ref().map_or_else(Labeling::all_secret, |l| l.resolve(&arrays));
    Ok((space, l))
}

/// Bounded relative security of `variant` applied to the program over a
/// state space. Returns `Ok` when it holds and `Violated` otherwise; the
/// report describes the verdict and any witness.
///
/// # Safety
/// Pointers must be null where allowed or valid; `out_report` must be
/// writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn slh_check_relsec(
    p: *const SlhProgram,
    labels: *const SlhLabeling,
    space: *const c_char,
    variant: *const c_char,
    flag_var: *const c_char,
    max_dirs: usize,
    fuel: usize,
    out_report: *mut *mut c_char,
) -> SlhStatus {
    guard(|| {
        let p = handle(p, "program")?;
        let (space, l) = space_and_labels(p, labels, space)?;
        let prot = protection(text(variant, "variant")?)?;
        let flag = opt_text(flag_var, "flag variable")?.unwrap_or(slh_core::harden::DEFAULT_FLAG);
        let v = check_relative_security(prot, &p.com, &l, &space, Bounds { max_dirs, fuel }, flag)
            .map_err(check_failure)?;
        put(out_report, c_string(v.to_string()))?;
        Ok(verdict_status(&v))
    })
}

/// Bounded speculative constant time of the program as given.
///
/// # Safety
/// Pointers must be null where allowed or valid; `out_report` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn slh_check_sct(
    p: *const SlhProgram,
    labels: *const SlhLabeling,
    space: *const c_char,
    max_dirs: usize,
    fuel: usize,
    out_report: *mut *mut c_char,
) -> SlhStatus {
    guard(|| {
        let p = handle(p, "program")?;
        let (space, l) = space_and_labels(p, labels, space)?;
        let v = check_sct(&p.com, &l, &space, Bounds { max_dirs, fuel });
        put(out_report, c_string(v.to_string()))?;
        Ok(verdict_status(&v))
    })
}

/// Replays the headline result of reference listing `listing` (1 to 6).
///
/// # Safety
/// `out_report` must be writable.
#[no_mangle]
pub unsafe extern "C" fn slh_repro(listing: u32, out_report: *mut *mut c_char) -> SlhStatus {
    guard(|| {
        let f = fixture(listing as usize)
            .ok_or_else(|| Failure(SlhStatus::UnknownListing, format!("no listing {listing}; listings are 1 to 6")))?;
        let (e, v) = f.repro();
        let v = v.map_err(check_failure)?;
        let report = format!("listing {} ({}): {} with {}\n{}", f.id, f.title, e.property, e.protection, v);
        put(out_report, c_string(report))?;
        Ok(verdict_status(&v))
    })
}

/// Whether `variant` names a hardening pass this library knows.
///
/// # Safety
/// `variant` must be null or a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn slh_variant_known(variant: *const c_char) -> bool {
    !variant.is_null() && CStr::from_ptr(variant).to_str().is_ok_and(|v| v.parse::<Protection>().is_ok())
}
