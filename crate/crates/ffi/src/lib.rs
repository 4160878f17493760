//! C interface. Objects are opaque handles released with their `_free`
//! function; results come back as JSON strings released with
//! `fl_string_free`. Every call returns an `FlStatus`; on failure
//! `fl_last_error` describes the problem.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use floiation::cli::{classify_torus, enumeration_report, straighten_surface, CliError, Sampling};
use floiation::complex::{bundled, Complex};
use floiation::floation2::ClosedLeafCaps;
use floiation::floation3::{decide_regularity, order_induced_direction};
use floiation::orders::{Comparison, OrderOracle, OrderSpec};
use floiation::complex::Direction;
use serde_json::{json, Value};

/// Status codes. Values 3 to 12 match the command-line exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Input = 4,
    Complex = 5,
    Order = 6,
    Embed = 7,
    Floation2 = 8,
    Model = 9,
    Straighten = 10,
    Floation3 = 11,
    Render = 12,
    Panic = 13,
}

/// Opaque complex handle.
pub struct FlComplex(Complex);

/// Opaque order handle.
pub struct FlOrder(OrderOracle);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(FlStatus, String);

impl From<CliError> for Failure {
    fn from(e: CliError) -> Self {
        let status = match e.exit_code() {
            3 => FlStatus::Io,
            4 => FlStatus::Input,
            5 => FlStatus::Complex,
            6 => FlStatus::Order,
            7 => FlStatus::Embed,
            8 => FlStatus::Floation2,
            9 => FlStatus::Model,
            10 => FlStatus::Straighten,
            11 => FlStatus::Floation3,
            _ => FlStatus::Render,
        };
        Failure(status, e.to_string())
    }
}

macro_rules! from_core {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                CliError::from(e).into()
            }
        }
    )*};
}

from_core!(
    floiation::complex::ComplexError,
    floiation::orders::OrderError,
    floiation::floation3::Floation3Error
);

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            FlStatus::Ok
        }
        Ok(Err(Failure(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            FlStatus::Panic
        }
    }
}

/// # Safety
/// `p` must be null or a valid NUL-terminated string.
unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(FlStatus::NullArgument, "null string argument".into()));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(FlStatus::InvalidUtf8, "string is not UTF-8".into()))
}

/// # Safety
/// `p` must be null or point to a live handle.
unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure(FlStatus::NullArgument, "null handle".into()))
}

/// # Safety
/// `out` must be null or writable.
unsafe fn put<T>(out: *mut *mut T, v: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(FlStatus::NullArgument, "null output pointer".into()));
    }
    *out = Box::into_raw(Box::new(v));
    Ok(())
}

/// # Safety
/// `out` must be null or writable.
unsafe fn put_json(out: *mut *mut c_char, v: &Value) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(FlStatus::NullArgument, "null output pointer".into()));
    }
    let c = CString::new(v.to_string()).map_err(|e| Failure(FlStatus::Io, e.to_string()))?;
    *out = c.into_raw();
    Ok(())
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call on the same thread.
#[no_mangle]
pub extern "C" fn fl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn fl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn fl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads a bundled complex by name (`TOR2`, `OCT8`, `T3CUBE`).
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fl_complex_bundled(name: *const c_char, out: *mut *mut FlComplex) -> FlStatus {
    guard(|| put(out, FlComplex(bundled(text(name)?)?)))
}

/// Parses a complex from its JSON document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fl_complex_from_json(json: *const c_char, out: *mut *mut FlComplex) -> FlStatus {
    guard(|| put(out, FlComplex(Complex::from_json(text(json)?)?)))
}

/// # Safety
/// `c` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fl_complex_free(c: *mut FlComplex) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Invariant report as JSON.
///
/// # Safety
/// `c` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fl_complex_report(c: *const FlComplex, out: *mut *mut c_char) -> FlStatus {
    guard(|| put_json(out, &handle(c)?.0.report()))
}

/// Builds an order from its JSON specification.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fl_order_from_json(json: *const c_char, precision_bits: u32, out: *mut *mut FlOrder) -> FlStatus {
    guard(|| put(out, FlOrder(OrderSpec::from_json(text(json)?, precision_bits)?)))
}

/// # Safety
/// `o` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fl_order_free(o: *mut FlOrder) {
    if !o.is_null() {
        drop(Box::from_raw(o));
    }
}

/// # Safety
/// `o` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fl_order_describe(o: *const FlOrder, out: *mut *mut c_char) -> FlStatus {
    guard(|| put_json(out, &handle(o)?.0.describe()))
}

/// Compares two words written in the order's generator names; writes -1, 0
/// or 1.
///
/// # Safety
/// `o` must be a live handle, `u` and `v` NUL-terminated strings, `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn fl_order_compare(
    o: *const FlOrder,
    u: *const c_char,
    v: *const c_char,
    out: *mut i32,
) -> FlStatus {
    guard(|| {
        let o = &handle(o)?.0;
        let g = o.generators();
        let parse = |s: &str| g.parse(s).map_err(|e| Failure(FlStatus::Input, e.to_string()));
        let c = o.compare(&parse(text(u)?)?, &parse(text(v)?)?)?;
        if out.is_null() {
            return Err(Failure(FlStatus::NullArgument, "null output pointer".into()));
        }
        *out = match c {
            Comparison::Less => -1,
            Comparison::Equivalent => 0,
            Comparison::Greater => 1,
        };
        Ok(())
    })
}

fn solid(c: &FlComplex) -> Result<&floiation::complex::Triangulation3, Failure> {
    match &c.0 {
        Complex::Solid(t) => Ok(t),
        Complex::Surface(_) => Err(Failure(FlStatus::Input, "expected a 3-dimensional complex".into())),
    }
}

fn surface(c: &FlComplex) -> Result<&floiation::complex::Triangulation2, Failure> {
    match &c.0 {
        Complex::Surface(t) => Ok(t),
        Complex::Solid(_) => Err(Failure(FlStatus::Input, "expected a surface".into())),
    }
}

/// Audits an explicit direction given as `len` entries of +1 or -1.
///
/// # Safety
/// `c` must be a live handle, `direction` must point to `len` readable
/// bytes, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fl_audit3_direction(
    c: *const FlComplex,
    direction: *const i8,
    len: usize,
    out: *mut *mut c_char,
) -> FlStatus {
    guard(|| {
        let t = solid(handle(c)?)?;
        if direction.is_null() {
            return Err(Failure(FlStatus::NullArgument, "null direction".into()));
        }
        let d = Direction(std::slice::from_raw_parts(direction, len).to_vec());
        put_json(out, &json!(decide_regularity(t, &d)?))
    })
}

/// Audits the direction induced by an order.
///
/// # Safety
/// `c` and `o` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fl_audit3_order(c: *const FlComplex, o: *const FlOrder, out: *mut *mut c_char) -> FlStatus {
    guard(|| {
        let t = solid(handle(c)?)?;
        let d = order_induced_direction(t, &handle(o)?.0)?;
        put_json(out, &json!(decide_regularity(t, &d)?))
    })
}

/// Exhaustive audit of all edge directions.
///
/// # Safety
/// `c` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fl_audit3_enumerate(c: *const FlComplex, valid_only: bool, out: *mut *mut c_char) -> FlStatus {
    guard(|| {
        let (_, v) = enumeration_report(solid(handle(c)?)?, valid_only, 128)?;
        put_json(out, &v)
    })
}

/// Closed-leaf search and Archimedean test on a torus.
///
/// # Safety
/// `c` and `o` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fl_torus_classify(
    c: *const FlComplex,
    o: *const FlOrder,
    radius: usize,
    max_crossings: usize,
    out: *mut *mut c_char,
) -> FlStatus {
    guard(|| {
        let t = surface(handle(c)?)?;
        let o = Arc::new(handle(o)?.0.clone());
        put_json(out, &classify_torus(t, o, ClosedLeafCaps { radius, max_crossings })?)
    })
}

/// Straightened lamination of sampled leaves, as JSON.
///
/// # Safety
/// `c` and `o` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fl_straighten(
    c: *const FlComplex,
    o: *const FlOrder,
    samples: usize,
    seed: u64,
    eps: f64,
    max_crossings: usize,
    out: *mut *mut c_char,
) -> FlStatus {
    guard(|| {
        let t = surface(handle(c)?)?;
        let sampling = Sampling { samples, seed, eps, max_crossings };
        let st = straighten_surface(t, &handle(o)?.0, &sampling, "ffi", false)?;
        let mut v = serde_json::to_value(&st.lamination).map_err(|e| Failure(FlStatus::Io, e.to_string()))?;
        v["is_lamination"] = json!(st.lamination.is_lamination());
        put_json(out, &v)
    })
}
