//! C ABI over `extremal-core`.
//!
//! Objects cross the boundary as opaque handles created by `ex_*_new` or
//! `ex_*_from_json` and released by the matching `ex_*_free`. Every fallible
//! call returns an [`ExStatus`]; on failure the message is kept per thread
//! and read with [`ex_last_error`]. Strings returned by the library are
//! released with [`ex_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use extremal_core::boundary::{blaschke_sigma, poisson, BlaschkeDisc};
use extremal_core::capacity::capacity;
use extremal_core::discs::{optimize_discs, DiscOptResult, OptimizerParams};
use extremal_core::envelope::{io, solve_extremal, EnvelopeResult, SolverParams};
use extremal_core::geometry::{ComplexPoint, DomainSpec, SetExpr};
use extremal_core::harness::{run, ExperimentConfig};
use extremal_core::Error;
use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidUtf8 = 3,
    Json = 4,
    DimensionMismatch = 5,
    OutsideDomain = 6,
    NotArcAlgebra = 7,
    InfeasibleDisc = 8,
    NodeCap = 9,
    Config = 10,
    Io = 11,
    Panic = 12,
}

/// Domain handle.
pub struct ExDomain(DomainSpec);
/// Set handle.
pub struct ExSet(SetExpr);
/// Converged envelope handle.
pub struct ExField(EnvelopeResult);
/// Disc optimisation result handle.
pub struct ExDiscResult(DiscOptResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ExStatus {
    match e {
        Error::DimensionMismatch { .. } => ExStatus::DimensionMismatch,
        Error::NotArcAlgebra(_) => ExStatus::NotArcAlgebra,
        Error::OutsideDomain => ExStatus::OutsideDomain,
        Error::InfeasibleDisc { .. } => ExStatus::InfeasibleDisc,
        Error::NodeCap { .. } => ExStatus::NodeCap,
        Error::Invalid(_) => ExStatus::InvalidArgument,
        Error::Config { .. } => ExStatus::Config,
        Error::Io(_) => ExStatus::Io,
        Error::Json(_) => ExStatus::Json,
    }
}

struct Fail(ExStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

impl From<serde_json::Error> for Fail {
    fn from(e: serde_json::Error) -> Self {
        Fail(ExStatus::Json, e.to_string())
    }
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> ExStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ExStatus::Ok,
        Ok(Err(Fail(s, m))) => {
            set_error(m);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            ExStatus::Panic
        }
    }
}

fn null() -> Fail {
    Fail(ExStatus::NullPointer, "null pointer argument".into())
}

unsafe fn borrow<'a, T>(p: *const T) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(null)
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Fail(ExStatus::InvalidUtf8, e.to_string()))
}

unsafe fn emit<T>(out: *mut *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null());
    }
    *out = Box::into_raw(Box::new(v));
    Ok(())
}

unsafe fn emit_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null());
    }
    *out = CString::new(s).map_err(|e| Fail(ExStatus::InvalidArgument, e.to_string()))?.into_raw();
    Ok(())
}

unsafe fn point(coords: *const f64, n: usize) -> Result<ComplexPoint, Fail> {
    if coords.is_null() {
        return Err(null());
    }
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Fail(ExStatus::InvalidArgument, "coordinates come in (re, im) pairs".into()));
    }
    let xs = std::slice::from_raw_parts(coords, n);
    Ok(ComplexPoint::new(ComplexPoint::from_real(xs).coords().to_vec())?)
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`) and returns the full message length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn ex_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_ref().map_or(&[][..], |c| c.as_bytes());
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn ex_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ex_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a domain such as `{"kind":"unit_disc"}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ex_domain_from_json(json: *const c_char, out: *mut *mut ExDomain) -> ExStatus {
    guard(|| {
        let d: DomainSpec = serde_json::from_str(text(json)?)?;
        d.validate()?;
        emit(out, ExDomain(d))
    })
}

/// # Safety
/// `d` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ex_domain_free(d: *mut ExDomain) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Parses a set such as `{"type":"arc","start":0,"end":3.14}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ex_set_from_json(json: *const c_char, out: *mut *mut ExSet) -> ExStatus {
    guard(|| {
        let s: SetExpr = serde_json::from_str(text(json)?)?;
        s.validate()?;
        emit(out, ExSet(s))
    })
}

/// # Safety
/// `s` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ex_set_free(s: *mut ExSet) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Grid envelope of `-chi_A` with spacing `h` and tolerance `tol`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ex_envelope_solve(
    domain: *const ExDomain,
    set: *const ExSet,
    h: f64,
    tol: f64,
    out: *mut *mut ExField,
) -> ExStatus {
    guard(|| {
        let params = SolverParams {
            h: Some(h),
            tol,
            ..SolverParams::default()
        };
        let (_, env) = solve_extremal(&borrow(domain)?.0, &borrow(set)?.0, &params)?;
        emit(out, ExField(env))
    })
}

/// # Safety
/// `f` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ex_field_free(f: *mut ExField) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Non-zero when the solve met its tolerance.
///
/// # Safety
/// `f` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ex_field_converged(f: *const ExField) -> i32 {
    f.as_ref().map_or(0, |f| i32::from(f.0.converged))
}

/// Envelope at a point given as `n` reals `(re1, im1[, re2, im2])`.
///
/// # Safety
/// `f` must be live, `coords` must hold `n` doubles, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ex_field_interpolate(f: *const ExField, coords: *const f64, n: usize, out: *mut f64) -> ExStatus {
    guard(|| {
        let x = point(coords, n)?;
        let v = borrow(f)?.0.field.interpolate(&x.to_real())?;
        *out.as_mut().ok_or_else(null)? = v;
        Ok(())
    })
}

/// Writes the field as CSV (`re1,im1[,re2,im2],value`).
///
/// # Safety
/// `f` must be live and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ex_field_write_csv(f: *const ExField, path: *const c_char) -> ExStatus {
    guard(|| Ok(io::save_csv(&borrow(f)?.0.field, Path::new(text(path)?))?))
}

/// Harmonic measure formula value `poisson(z, U)` for an arc set on the
/// unit disc.
///
/// # Safety
/// `set` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ex_poisson(re: f64, im: f64, set: *const ExSet, out: *mut f64) -> ExStatus {
    guard(|| {
        let v = poisson(Complex64::new(re, im), &borrow(set)?.0)?;
        *out.as_mut().ok_or_else(null)? = v;
        Ok(())
    })
}

/// Boundary measure of `U` pulled back by the disc automorphism sending 0
/// to `re + i im`.
///
/// # Safety
/// `set` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ex_mobius_sigma(re: f64, im: f64, set: *const ExSet, out: *mut f64) -> ExStatus {
    guard(|| {
        let b = BlaschkeDisc::mobius(Complex64::new(re, im))?;
        let v = blaschke_sigma(&b, &borrow(set)?.0)?;
        *out.as_mut().ok_or_else(null)? = v;
        Ok(())
    })
}

/// Capacity of a set at grid spacing `h`.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ex_capacity(domain: *const ExDomain, set: *const ExSet, h: f64, out: *mut f64) -> ExStatus {
    guard(|| {
        let r = capacity(&borrow(domain)?.0, &borrow(set)?.0, &SolverParams::with_h(h))?;
        *out.as_mut().ok_or_else(null)? = r.value;
        Ok(())
    })
}

/// Best disc centred at the point `coords` (`n` reals).
///
/// # Safety
/// Handles must be live, `coords` must hold `n` doubles, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ex_optimize_discs(
    domain: *const ExDomain,
    set: *const ExSet,
    coords: *const f64,
    n: usize,
    degree: usize,
    restarts: usize,
    seed: u64,
    out: *mut *mut ExDiscResult,
) -> ExStatus {
    guard(|| {
        let x = point(coords, n)?;
        let params = OptimizerParams {
            degree,
            restarts,
            seed,
            ..OptimizerParams::default()
        };
        let r = optimize_discs(&borrow(domain)?.0, &borrow(set)?.0, &x, &params)?;
        emit(out, ExDiscResult(r))
    })
}

/// Best `sigma_f(A)` found; NaN for a null handle.
///
/// # Safety
/// `r` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn ex_disc_result_sigma(r: *const ExDiscResult) -> f64 {
    r.as_ref().map_or(f64::NAN, |r| r.0.sigma)
}

/// The result as JSON; release with [`ex_string_free`].
///
/// # Safety
/// `r` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ex_disc_result_to_json(r: *const ExDiscResult, out: *mut *mut c_char) -> ExStatus {
    guard(|| emit_string(out, serde_json::to_string(&borrow(r)?.0)?))
}

/// # Safety
/// `r` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ex_disc_result_free(r: *mut ExDiscResult) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Runs an experiment config (JSON) and returns the result record as JSON.
/// A run with ledger failures still returns [`ExStatus::Ok`].
///
/// # Safety
/// `config` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ex_run_json(config: *const c_char, out: *mut *mut c_char) -> ExStatus {
    guard(|| {
        let cfg = ExperimentConfig::from_json(text(config)?)?;
        let rec = run(&cfg)?;
        emit_string(out, serde_json::to_string(&rec)?)
    })
}
