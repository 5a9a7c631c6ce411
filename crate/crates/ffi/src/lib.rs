//! C ABI for `dyadic-core`.
//!
//! Objects cross the boundary as opaque handles (`DyStepFunction`, `DyProfile`,
//! `DyCz`) that the caller releases with the matching `*_free`. Every fallible
//! function returns a [`DyStatus`] and writes results through out-pointers;
//! on failure `dy_last_error` describes the problem. Strings returned by the
//! library are released with `dy_string_free`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dyadic_core::cz::{cz_decompose, stopping_time_check, verify_cz, CZDecomposition};
use dyadic_core::dyadic_ops::{haar, martingale_diff, maximal_s, CoeffMatrix, DyadicInterval};
use dyadic_core::lorentz::lorentz_norm;
use dyadic_core::stepfn::{distribution, lp_norm, rearrange, DecreasingProfile, LorentzIndex, StepFunction};
use dyadic_core::suites::{run_suite, Suite, SuiteConfig};
use dyadic_core::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DyStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    UnsupportedIndex = 3,
    Precondition = 4,
    UndefinedRatio = 5,
    Json = 6,
    Io = 7,
    Panic = 8,
}

pub struct DyStepFunction(StepFunction);
pub struct DyProfile(DecreasingProfile);
pub struct DyCz(CZDecomposition);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> DyStatus {
    match e {
        Error::InvalidInput(_) => DyStatus::InvalidInput,
        Error::UnsupportedIndex { .. } => DyStatus::UnsupportedIndex,
        Error::Precondition(_) => DyStatus::Precondition,
        Error::UndefinedRatio(_) => DyStatus::UndefinedRatio,
        Error::Json(_) => DyStatus::Json,
        Error::Io(_) | Error::Csv(_) => DyStatus::Io,
    }
}

enum Fail {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

fn guard(body: impl FnOnce() -> Result<(), Fail>) -> DyStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => DyStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(&format!("null pointer: {what}"));
            DyStatus::NullPointer
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            DyStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn write<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn read_str<'a>(s: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| Fail::Core(Error::InvalidInput(format!("{what}: {e}"))))
}

fn to_c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|e| Fail::Core(Error::InvalidInput(e.to_string())))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Message for the last failed call on this thread; empty if none. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dy_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dy_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Step function on `[0, 2^m)` with `len = 2^(m+level)` cell values.
///
/// # Safety
/// `values` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dy_step_new(
    m: u32,
    level: u32,
    values: *const f64,
    len: usize,
    out: *mut *mut DyStepFunction,
) -> DyStatus {
    guard(|| {
        if values.is_null() && len > 0 {
            return Err(Fail::Null("values"));
        }
        let vals = if len == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(values, len).to_vec()
        };
        let f = StepFunction::new(m, level, vals)?;
        write(out, boxed(DyStepFunction(f)), "out")
    })
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dy_step_from_json(json: *const c_char, out: *mut *mut DyStepFunction) -> DyStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        let f: StepFunction = serde_json::from_str(text).map_err(Error::from)?;
        write(out, boxed(DyStepFunction(f)), "out")
    })
}

/// # Safety
/// `f` must be a live handle; `out` must be writable. Free the result with `dy_string_free`.
#[no_mangle]
pub unsafe extern "C" fn dy_step_to_json(f: *const DyStepFunction, out: *mut *mut c_char) -> DyStatus {
    guard(|| {
        let f = deref(f, "f")?;
        let s = serde_json::to_string(&f.0).map_err(Error::from)?;
        write(out, to_c_string(s)?, "out")
    })
}

/// # Safety
/// `f` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dy_step_free(f: *mut DyStepFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Number of cells.
///
/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dy_step_len(f: *const DyStepFunction, out: *mut usize) -> DyStatus {
    guard(|| write(out, deref(f, "f")?.0.len(), "out"))
}

/// Copies `min(cap, len)` cell values into `buf`.
///
/// # Safety
/// `f` must be a live handle; `buf` must have room for `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn dy_step_values(f: *const DyStepFunction, buf: *mut f64, cap: usize) -> DyStatus {
    guard(|| {
        let values = deref(f, "f")?.0.values();
        let n = cap.min(values.len());
        if n > 0 {
            if buf.is_null() {
                return Err(Fail::Null("buf"));
            }
            ptr::copy_nonoverlapping(values.as_ptr(), buf, n);
        }
        Ok(())
    })
}

/// Measure of `{|f| > s}`.
///
/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dy_distribution(f: *const DyStepFunction, s: f64, out: *mut f64) -> DyStatus {
    guard(|| {
        if !(s >= 0.0) {
            return Err(Fail::Core(Error::InvalidInput(format!(
                "s must be nonnegative, got {s}"
            ))));
        }
        write(out, distribution(&deref(f, "f")?.0, s), "out")
    })
}

/// `||f||_p`; pass `INFINITY` for the sup norm.
///
/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dy_lp_norm(f: *const DyStepFunction, p: f64, out: *mut f64) -> DyStatus {
    guard(|| write(out, lp_norm(&deref(f, "f")?.0, p)?, "out"))
}

/// `||f||_{p,q}`.
///
/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dy_lorentz_norm(
    f: *const DyStepFunction,
    p: f64,
    q: f64,
    out: *mut f64,
) -> DyStatus {
    guard(|| {
        let idx = LorentzIndex::new(p, q)?;
        write(out, lorentz_norm(&deref(f, "f")?.0, idx)?, "out")
    })
}

/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dy_rearrange(f: *const DyStepFunction, out: *mut *mut DyProfile) -> DyStatus {
    guard(|| write(out, boxed(DyProfile(rearrange(&deref(f, "f")?.0))), "out"))
}

/// Number of constant pieces of `f*`.
///
/// # Safety
/// `p` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dy_profile_steps(p: *const DyProfile, out: *mut usize) -> DyStatus {
    guard(|| write(out, deref(p, "profile")?.0.steps(), "out"))
}

/// Piece `i`: `f* = value` on `[t_start, t_end)`.
///
/// # Safety
/// `p` must be a live handle; the out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn dy_profile_step(
    p: *const DyProfile,
    i: usize,
    t_start: *mut f64,
    t_end: *mut f64,
    value: *mut f64,
) -> DyStatus {
    guard(|| {
        let profile = &deref(p, "profile")?.0;
        let (a, b, v) = profile
            .iter_steps()
            .nth(i)
            .ok_or_else(|| Error::InvalidInput(format!("step {i} out of range ({})", profile.steps())))?;
        write(t_start, a, "t_start")?;
        write(t_end, b, "t_end")?;
        write(value, v, "value")
    })
}

/// `f*(t)`, right-continuous.
///
/// # Safety
/// `p` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dy_profile_eval(p: *const DyProfile, t: f64, out: *mut f64) -> DyStatus {
    guard(|| write(out, deref(p, "profile")?.0.eval(t), "out"))
}

/// # Safety
/// `p` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dy_profile_free(p: *mut DyProfile) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Haar function of `[j 2^-k, (j+1) 2^-k)` on the `(m, level)` grid.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dy_haar(
    k: i32,
    j: u64,
    m: u32,
    level: u32,
    out: *mut *mut DyStepFunction,
) -> DyStatus {
    guard(|| {
        let h = haar(DyadicInterval::new(k, j), m, level)?;
        write(out, boxed(DyStepFunction(h)), "out")
    })
}

/// `D_k f`.
///
/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dy_martingale_diff(
    f: *const DyStepFunction,
    k: i32,
    out: *mut *mut DyStepFunction,
) -> DyStatus {
    guard(|| {
        let d = martingale_diff(&deref(f, "f")?.0, k)?;
        write(out, boxed(DyStepFunction(d)), "out")
    })
}

/// `S f` for coefficients given as `{"entries":[{"k":..,"j":..,"a":..}]}`.
///
/// # Safety
/// `f` must be a live handle, `coeffs_json` a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dy_maximal_s(
    f: *const DyStepFunction,
    coeffs_json: *const c_char,
    out: *mut *mut DyStepFunction,
) -> DyStatus {
    guard(|| {
        let a: CoeffMatrix =
            serde_json::from_str(read_str(coeffs_json, "coeffs_json")?).map_err(Error::from)?;
        let s = maximal_s(&deref(f, "f")?.0, &a)?;
        write(out, boxed(DyStepFunction(s)), "out")
    })
}

/// Calderon-Zygmund decomposition at `height`.
///
/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dy_cz_decompose(
    f: *const DyStepFunction,
    height: f64,
    out: *mut *mut DyCz,
) -> DyStatus {
    guard(|| {
        let dec = cz_decompose(&deref(f, "f")?.0, height)?;
        write(out, boxed(DyCz(dec)), "out")
    })
}

/// # Safety
/// `dec` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dy_cz_cube_count(dec: *const DyCz, out: *mut usize) -> DyStatus {
    guard(|| write(out, deref(dec, "dec")?.0.bad.len(), "out"))
}

/// Cube `i` as the dyadic interval `[j 2^-k, (j+1) 2^-k)`.
///
/// # Safety
/// `dec` must be a live handle; `k` and `j` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dy_cz_cube(dec: *const DyCz, i: usize, k: *mut i32, j: *mut u64) -> DyStatus {
    guard(|| {
        let bad = &deref(dec, "dec")?.0.bad;
        let cube = bad
            .get(i)
            .ok_or_else(|| Error::InvalidInput(format!("cube {i} out of range ({})", bad.len())))?
            .cube;
        write(k, cube.k, "k")?;
        write(j, cube.j, "j")
    })
}

/// A copy of the good part `g`.
///
/// # Safety
/// `dec` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dy_cz_good(dec: *const DyCz, out: *mut *mut DyStepFunction) -> DyStatus {
    guard(|| {
        write(
            out,
            boxed(DyStepFunction(deref(dec, "dec")?.0.good.clone())),
            "out",
        )
    })
}

/// Runs the decomposition and stopping-time checks; `passed` is 1 when both pass,
/// `report_json` (optional, may be null) receives both reports as a JSON array.
///
/// # Safety
/// `f` and `dec` must be live handles; `passed` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dy_cz_verify(
    f: *const DyStepFunction,
    dec: *const DyCz,
    passed: *mut i32,
    report_json: *mut *mut c_char,
) -> DyStatus {
    guard(|| {
        let (f, dec) = (&deref(f, "f")?.0, &deref(dec, "dec")?.0);
        let a = verify_cz(f, dec)?;
        let b = stopping_time_check(f, dec);
        write(passed, i32::from(a.pass && b.pass), "passed")?;
        if !report_json.is_null() {
            let s = serde_json::to_string(&[a, b]).map_err(Error::from)?;
            write(report_json, to_c_string(s)?, "report_json")?;
        }
        Ok(())
    })
}

/// # Safety
/// `dec` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dy_cz_free(dec: *mut DyCz) {
    if !dec.is_null() {
        drop(Box::from_raw(dec));
    }
}

/// Runs a named suite. `terms < 0` means unset. `passed` is 1 iff every report
/// passes; `report_json` receives the report collection.
///
/// # Safety
/// `suite` must be a NUL-terminated string; `passed` and `report_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dy_run_suite(
    suite: *const c_char,
    seed: u64,
    cases: usize,
    level: u32,
    m: u32,
    terms: i64,
    passed: *mut i32,
    report_json: *mut *mut c_char,
) -> DyStatus {
    guard(|| {
        let terms = if terms < 0 {
            None
        } else {
            Some(u32::try_from(terms).map_err(|_| Error::InvalidInput(format!("terms {terms} too large")))?)
        };
        let cfg = SuiteConfig {
            suite: read_str(suite, "suite")?.parse::<Suite>()?,
            seed,
            cases,
            level,
            m,
            terms,
        };
        if passed.is_null() {
            return Err(Fail::Null("passed"));
        }
        if report_json.is_null() {
            return Err(Fail::Null("report_json"));
        }
        let reports = run_suite(&cfg)?;
        let json = reports.to_json()?;
        write(passed, i32::from(reports.all_pass()), "passed")?;
        write(report_json, to_c_string(json)?, "report_json")
    })
}
