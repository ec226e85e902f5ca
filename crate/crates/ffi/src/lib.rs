//! C ABI for `cyclealg`.
//!
//! Elements and point derivations cross the boundary as opaque handles;
//! everything else is JSON text in the same formats the CLI reads and
//! writes. Every function returns a [`CycStatus`]; on failure a message is
//! available from [`cyc_last_error`] until the next call on the same thread.
//! Strings returned through `out` parameters are owned by the caller and
//! must be released with [`cyc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cyclealg::algebra::RealizedJson;
use cyclealg::derivations::{decide_inner, GenDerivation};
use cyclealg::reconstruction::{default_grid, reconstruct, GlobalDerivation};
use cyclealg::{sample, CycleElement, Error, RepPoint};
use num_complex::Complex64;
use serde_json::Value;

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CycStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    DimensionMismatch = 4,
    IndexOutOfRange = 5,
    NotInAlgebra = 6,
    DegreeOverflow = 7,
    NotLocallyInner = 8,
    Precondition = 9,
    RootMismatch = 10,
    BufferTooSmall = 11,
    Panic = 12,
}

/// Opaque element of the cycle algebra.
pub struct CycElement(CycleElement);

/// Opaque point derivation presented on generators.
pub struct CycDerivation(GenDerivation);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(CycStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::RootMismatch { .. } => CycStatus::RootMismatch,
            Error::IndexOutOfRange { .. } => CycStatus::IndexOutOfRange,
            Error::DimensionMismatch { .. } => CycStatus::DimensionMismatch,
            Error::DegreeOverflow { .. } => CycStatus::DegreeOverflow,
            Error::NotInAlgebra { .. } => CycStatus::NotInAlgebra,
            Error::NotLocallyInner { .. } => CycStatus::NotLocallyInner,
            Error::Precondition(_) => CycStatus::Precondition,
            Error::Json(_) => CycStatus::Parse,
        };
        Fail(status, e.to_string())
    }
}

impl From<serde_json::Error> for Fail {
    fn from(e: serde_json::Error) -> Self {
        Fail(CycStatus::Parse, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(CycStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> CycStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CycStatus::Ok,
        Ok(Err(Fail(status, message))) => {
            set_error(&message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CycStatus::Panic
        }
    }
}

/// # Safety
/// `s` is null or a valid nul-terminated string.
unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| Fail(CycStatus::InvalidUtf8, format!("{what}: {e}")))
}

/// # Safety
/// `p` is null or a live handle.
unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

/// # Safety
/// `out` is null or valid for one write.
unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// # Safety
/// `out` is null or valid for one write.
unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = CString::new(s).expect("JSON has no nul bytes").into_raw();
    Ok(())
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn cyc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or null.
#[no_mangle]
pub extern "C" fn cyc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` is null or was returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cyc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses an element from `{"n", "entries"}` or `{"n", "realized"}` JSON.
///
/// # Safety
/// `json` is a nul-terminated string; `out` is valid for one write.
#[no_mangle]
pub unsafe extern "C" fn cyc_element_from_json(
    json: *const c_char,
    out: *mut *mut CycElement,
) -> CycStatus {
    guard(|| {
        let v: Value = serde_json::from_str(read_str(json, "json")?)?;
        let a = if v.get("realized").is_some() {
            serde_json::from_value::<RealizedJson>(v)?.to_element()?
        } else {
            serde_json::from_value::<CycleElement>(v)?
        };
        put(out, CycElement(a))
    })
}

/// Serializes an element as `{"n", "entries"}` JSON.
///
/// # Safety
/// `a` is a live handle; `out` is valid for one write.
#[no_mangle]
pub unsafe extern "C" fn cyc_element_to_json(
    a: *const CycElement,
    out: *mut *mut c_char,
) -> CycStatus {
    guard(|| {
        let a = handle(a, "a")?;
        put_string(out, serde_json::to_string(&a.0)?)
    })
}

/// # Safety
/// `a` is null or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cyc_element_free(a: *mut CycElement) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}

/// Dimension `n`, or 0 for a null handle.
///
/// # Safety
/// `a` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cyc_element_dim(a: *const CycElement) -> usize {
    a.as_ref().map_or(0, |a| a.0.n())
}

/// Idempotent `e_ii` (`edge == false`) or edge generator `Z_i` (`edge == true`),
/// with a 1-based index `i`.
///
/// # Safety
/// `out` is valid for one write.
#[no_mangle]
pub unsafe extern "C" fn cyc_element_generator(
    n: usize,
    i: usize,
    edge: bool,
    out: *mut *mut CycElement,
) -> CycStatus {
    guard(|| {
        let a = if edge {
            CycleElement::gen_z(n, i)?
        } else {
            CycleElement::gen_e(n, i)?
        };
        put(out, CycElement(a))
    })
}

/// `a + b`.
///
/// # Safety
/// `a` and `b` are live handles; `out` is valid for one write.
#[no_mangle]
pub unsafe extern "C" fn cyc_element_add(
    a: *const CycElement,
    b: *const CycElement,
    out: *mut *mut CycElement,
) -> CycStatus {
    guard(|| {
        let sum = handle(a, "a")?.0.add_elem(&handle(b, "b")?.0)?;
        put(out, CycElement(sum))
    })
}

/// `a b`, subject to the default degree bound.
///
/// # Safety
/// `a` and `b` are live handles; `out` is valid for one write.
#[no_mangle]
pub unsafe extern "C" fn cyc_element_mul(
    a: *const CycElement,
    b: *const CycElement,
    out: *mut *mut CycElement,
) -> CycStatus {
    guard(|| {
        let product = handle(a, "a")?.0.mul_elem(&handle(b, "b")?.0)?;
        put(out, CycElement(product))
    })
}

/// Evaluates at a representation point given as JSON
/// (`{"kind":"lambda","re":..,"im":..}` or `{"kind":"diag0","i":..}`).
///
/// Writes the `d x d` value row-major as interleaved real and imaginary
/// parts into `out` (capacity `len` doubles) and `d` into `dim`.
///
/// # Safety
/// `a` is a live handle, `point` a nul-terminated string, `out` valid for
/// `len` writes and `dim` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn cyc_element_eval(
    a: *const CycElement,
    point: *const c_char,
    out: *mut f64,
    len: usize,
    dim: *mut usize,
) -> CycStatus {
    guard(|| {
        let a = handle(a, "a")?;
        let point: RepPoint = serde_json::from_str(read_str(point, "point")?)?;
        let value = cyclealg::representations::eval_rep(&point, &a.0)?;
        let d = value.dim();
        if dim.is_null() {
            return Err(null("dim"));
        }
        *dim = d;
        if len < 2 * d * d {
            return Err(Fail(
                CycStatus::BufferTooSmall,
                format!("need {} doubles, got {len}", 2 * d * d),
            ));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let buf = std::slice::from_raw_parts_mut(out, 2 * d * d);
        for i in 0..d {
            for j in 0..d {
                let v: Complex64 = value.get(i, j);
                buf[2 * (i * d + j)] = v.re;
                buf[2 * (i * d + j) + 1] = v.im;
            }
        }
        Ok(())
    })
}

/// Parses `{"point", "values_e", "values_Z"}` JSON.
///
/// # Safety
/// `json` is a nul-terminated string; `out` is valid for one write.
#[no_mangle]
pub unsafe extern "C" fn cyc_derivation_from_json(
    json: *const c_char,
    out: *mut *mut CycDerivation,
) -> CycStatus {
    guard(|| {
        let d: GenDerivation = serde_json::from_str(read_str(json, "json")?)?;
        put(out, CycDerivation(d))
    })
}

/// # Safety
/// `d` is a live handle; `out` is valid for one write.
#[no_mangle]
pub unsafe extern "C" fn cyc_derivation_to_json(
    d: *const CycDerivation,
    out: *mut *mut c_char,
) -> CycStatus {
    guard(|| {
        let d = handle(d, "d")?;
        put_string(out, serde_json::to_string(&d.0)?)
    })
}

/// # Safety
/// `d` is null or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cyc_derivation_free(d: *mut CycDerivation) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Runs the inner-ness decision at tolerance `tol` and writes the verdict
/// report as JSON (`"verdict"` is `inner`, `not_inner` or `indeterminate`).
/// `is_inner` may be null.
///
/// # Safety
/// `d` is a live handle; `out` is valid for one write; `is_inner` is null
/// or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn cyc_inner_check(
    d: *const CycDerivation,
    tol: f64,
    seed: u64,
    out: *mut *mut c_char,
    is_inner: *mut bool,
) -> CycStatus {
    guard(|| {
        let d = handle(d, "d")?;
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Fail(CycStatus::Precondition, "tol must be positive".into()));
        }
        let verdict = decide_inner(&d.0, tol, 50, 64, seed)?;
        if let Some(flag) = is_inner.as_mut() {
            *flag = verdict.is_inner();
        }
        put_string(out, serde_json::to_string(&verdict)?)
    })
}

/// Reconstructs the global witness of a derivation given as
/// `{"n", "values_e", "values_Z"}` JSON and writes `{"X", "max_residual", "grid"}`.
/// Zero for `grid` or `deg_max` selects the defaults.
///
/// # Safety
/// `json` is a nul-terminated string; `out` is valid for one write.
#[no_mangle]
pub unsafe extern "C" fn cyc_reconstruct(
    json: *const c_char,
    grid: usize,
    deg_max: usize,
    tol: f64,
    seed: u64,
    out: *mut *mut c_char,
) -> CycStatus {
    guard(|| {
        let d: GlobalDerivation = serde_json::from_str(read_str(json, "json")?)?;
        let deg_max = if deg_max == 0 { cyclealg::poly::DEG_MAX } else { deg_max };
        let grid = if grid == 0 { default_grid(d.n(), deg_max) } else { grid };
        let report = reconstruct(&d, grid, deg_max, tol, 50, &mut sample::rng(seed))?;
        put_string(out, serde_json::to_string(&report)?)
    })
}
