//! C ABI over `xbiv`: opaque handles for problems and suite reports, JSON
//! strings for everything structured, and integer status codes.
//!
//! Every fallible call returns an [`XbivStatus`]; on failure the message is
//! available from [`xbiv_last_error`] on the same thread. Strings returned
//! through out-parameters are owned by the caller and released with
//! [`xbiv_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use xbiv::compute::{compute, ComputeArgs, Target};
use xbiv::problem::{ProblemFile, Resolved};
use xbiv::scalar::Mode;
use xbiv::suites::{run_suite, RunConfig, Suite, SuiteReport};
use xbiv::Error;

/// Status codes. `Ok` is zero; every other value names an error kind.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XbivStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    Resolution = 4,
    Parse = 5,
    NonAssociative = 6,
    BadUnit = 7,
    DimensionMismatch = 8,
    AlgebraMismatch = 9,
    TruncationOverflow = 10,
    WrongDegree = 11,
    NotIdempotent = 12,
    MalformedTriple = 13,
    ParityError = 14,
    ParityMismatch = 15,
    NegativeTime = 16,
    TargetMismatch = 17,
    PreconditionViolated = 18,
    GridTooCoarse = 19,
    NotIntegrable = 20,
    UnsupportedDimension = 21,
    NotTopDegree = 22,
    ModeMismatch = 23,
    Numerical = 24,
    Io = 25,
    Panic = 99,
    Other = 100,
}

impl From<&Error> for XbivStatus {
    fn from(e: &Error) -> Self {
        use XbivStatus as S;
        match e {
            Error::Config(_) => S::Config,
            Error::Resolution(_) => S::Resolution,
            Error::Parse(_) => S::Parse,
            Error::NonAssociative(..) => S::NonAssociative,
            Error::BadUnit(_) => S::BadUnit,
            Error::DimensionMismatch(_) => S::DimensionMismatch,
            Error::AlgebraMismatch => S::AlgebraMismatch,
            Error::TruncationOverflow { .. } => S::TruncationOverflow,
            Error::WrongDegree { .. } | Error::DegreeZeroInput => S::WrongDegree,
            Error::NotIdempotent | Error::NotAHomomorphism(..) => S::NotIdempotent,
            Error::MalformedTriple(_) => S::MalformedTriple,
            Error::ParityError(_) => S::ParityError,
            Error::ParityMismatch(_) => S::ParityMismatch,
            Error::NegativeTime(_) => S::NegativeTime,
            Error::TargetMismatch(_) => S::TargetMismatch,
            Error::PreconditionViolated(_) => S::PreconditionViolated,
            Error::GridTooCoarse(_) => S::GridTooCoarse,
            Error::NotIntegrable(_) => S::NotIntegrable,
            Error::UnsupportedDimension(_) => S::UnsupportedDimension,
            Error::NotTopDegree { .. } => S::NotTopDegree,
            Error::ModeMismatch(..) | Error::ModeError(_) => S::ModeMismatch,
            Error::Numerical(_) => S::Numerical,
            Error::Io(_) => S::Io,
        }
    }
}

/// A resolved problem: algebras, triples, idempotents and paths.
pub struct XbivProblem(Resolved);

/// The result of a suite run.
pub struct XbivReport(SuiteReport);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), XbivStatus>) -> XbivStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => XbivStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            XbivStatus::Panic
        }
    }
}

fn fail(e: Error) -> XbivStatus {
    set_error(&e.to_string());
    XbivStatus::from(&e)
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, XbivStatus> {
    if p.is_null() {
        set_error("null pointer argument");
        return Err(XbivStatus::NullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        XbivStatus::InvalidUtf8
    })
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), XbivStatus> {
    if out.is_null() {
        set_error("null output pointer");
        return Err(XbivStatus::NullPointer);
    }
    *out = CString::new(s).map_err(|_| XbivStatus::Other)?.into_raw();
    Ok(())
}

unsafe fn write_handle<T>(out: *mut *mut T, v: T) -> Result<(), XbivStatus> {
    if out.is_null() {
        set_error("null output pointer");
        return Err(XbivStatus::NullPointer);
    }
    *out = Box::into_raw(Box::new(v));
    Ok(())
}

/// Message of the last failed call on this thread. Valid until the next call
/// that fails; never null.
#[no_mangle]
pub extern "C" fn xbiv_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must come from this library, or be null.
#[no_mangle]
pub unsafe extern "C" fn xbiv_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Problem with only the built-in names (`C`, `C1`, `M2`, `fixture0…`).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn xbiv_problem_builtin(out: *mut *mut XbivProblem) -> XbivStatus {
    guard(|| write_handle(out, XbivProblem(Resolved::builtin())))
}

/// Parse and resolve a problem file given as JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn xbiv_problem_from_json(json: *const c_char, out: *mut *mut XbivProblem) -> XbivStatus {
    guard(|| {
        let text = read_str(json)?;
        let p = ProblemFile::parse(text).and_then(|f| f.resolve()).map_err(fail)?;
        write_handle(out, XbivProblem(p))
    })
}

/// # Safety
/// `p` must come from this library, or be null.
#[no_mangle]
pub unsafe extern "C" fn xbiv_problem_free(p: *mut XbivProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Run a suite (`identities`, `goodwillie`, `bar`, `jlo`, `bivariant`,
/// `bott`, `all`). `tol < 0` and `trunc < 0` select the per-check defaults.
///
/// # Safety
/// `problem` must be a live handle, `suite` a NUL-terminated string and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn xbiv_run_suite(problem: *const XbivProblem, suite: *const c_char, seed: u64, tol: f64, trunc: i64, out: *mut *mut XbivReport) -> XbivStatus {
    guard(|| {
        let p = problem.as_ref().ok_or_else(|| {
            set_error("null problem handle");
            XbivStatus::NullPointer
        })?;
        let suite: Suite = read_str(suite)?.parse().map_err(fail)?;
        let cfg = RunConfig {
            seed,
            mode: p.0.file.mode.unwrap_or(Mode::Exact),
            tol: (tol >= 0.0).then_some(tol),
            trunc: usize::try_from(trunc).ok(),
            ..RunConfig::default()
        };
        write_handle(out, XbivReport(run_suite(&p.0, suite, &cfg)))
    })
}

/// 1 if every check passed, 0 otherwise (also for a null handle).
///
/// # Safety
/// `r` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn xbiv_report_passed(r: *const XbivReport) -> i32 {
    r.as_ref().map_or(0, |r| i32::from(r.0.passed))
}

/// Number of checks in the report.
///
/// # Safety
/// `r` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn xbiv_report_len(r: *const XbivReport) -> usize {
    r.as_ref().map_or(0, |r| r.0.checks.len())
}

/// The report as JSON.
///
/// # Safety
/// `r` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn xbiv_report_json(r: *const XbivReport, out: *mut *mut c_char) -> XbivStatus {
    guard(|| {
        let r = r.as_ref().ok_or(XbivStatus::NullPointer)?;
        let s = serde_json::to_string(&r.0).map_err(|e| fail(e.into()))?;
        write_string(out, s)
    })
}

/// # Safety
/// `r` must come from this library, or be null.
#[no_mangle]
pub unsafe extern "C" fn xbiv_report_free(r: *mut XbivReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Evaluate `target` (`ch_idempotent`, `jlo`, `chi`, `pairing`, `bott`).
/// `args_json` is an object with optional keys `algebra`, `element`,
/// `idempotent`, `triple`, `chain`, `trunc`, `time`; it may be null.
///
/// # Safety
/// `problem` must be a live handle, strings NUL-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn xbiv_compute(problem: *const XbivProblem, target: *const c_char, args_json: *const c_char, out: *mut *mut c_char) -> XbivStatus {
    guard(|| {
        let p = problem.as_ref().ok_or(XbivStatus::NullPointer)?;
        let target: Target = read_str(target)?.parse().map_err(fail)?;
        let args: ComputeArgs = if args_json.is_null() { ComputeArgs::default() } else { serde_json::from_str(read_str(args_json)?).map_err(|e| fail(Error::Config(e.to_string())))? };
        let r = compute(&p.0, target, &args).map_err(fail)?;
        write_string(out, serde_json::to_string(&r).map_err(|e| fail(e.into()))?)
    })
}

/// Pairing of the Bott element with the fundamental class in dimension `n`,
/// lowered at `π` and `λ = 1`. Writes real and imaginary parts.
///
/// # Safety
/// `re` and `im` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn xbiv_bott_pairing(n: usize, re: *mut f64, im: *mut f64) -> XbivStatus {
    guard(|| {
        if re.is_null() || im.is_null() {
            return Err(XbivStatus::NullPointer);
        }
        let v = xbiv::bott::pair_bott_dirac(n).map_err(fail)?.lower(std::f64::consts::PI, 1.0);
        *re = v.re;
        *im = v.im;
        Ok(())
    })
}
