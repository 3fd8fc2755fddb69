//! C ABI for wulfflab.
//!
//! Objects are opaque handles created by `wl_*_new`/`wl_*_from_*` and released with the
//! matching `wl_*_free`. Every fallible call returns a [`WlStatus`]; on failure the message
//! is available from [`wl_last_error`] on the same thread until the next failing call.
//! Strings returned through `char **` out-parameters are owned by the caller and must be
//! released with [`wl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nalgebra::DVector;
use wulfflab::catalog::{anisotropy_by_name, entry, CatalogEntry};
use wulfflab::classify::classify;
use wulfflab::hypersurface::anisotropic_curvatures;
use wulfflab::{AnisotropyFunction, Error};

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WlStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Bad input: unknown name, malformed JSON, wrong length, invalid parameter.
    InvalidInput = 3,
    /// The anisotropy failed its convexity audit.
    ConvexityViolation = 4,
    /// A curvature group was not constant where constancy was required.
    NotIsoparametric = 5,
    /// Any other numerical failure (rank deficiency, non-convergence, degenerate translation).
    Numerical = 6,
    /// An output buffer was too small; the required length has been written.
    BufferTooSmall = 7,
    /// Internal panic caught at the boundary.
    Panic = 8,
}

/// An anisotropy integrand `F` on the unit sphere.
pub struct WlAnisotropy {
    inner: AnisotropyFunction,
}

/// A catalog immersion patch bound to the anisotropy it was built with.
pub struct WlEntry {
    inner: CatalogEntry,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> WlStatus {
    match e {
        Error::ConvexityViolation { .. } => WlStatus::ConvexityViolation,
        Error::NotIsoparametric { .. } => WlStatus::NotIsoparametric,
        e if e.is_input_error() => WlStatus::InvalidInput,
        _ => WlStatus::Numerical,
    }
}

/// Runs `body`, converting errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), (WlStatus, String)>) -> WlStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => WlStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("internal panic: {msg}"));
            WlStatus::Panic
        }
    }
}

fn lib<T>(r: wulfflab::Result<T>) -> Result<T, (WlStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn non_null<'a, T>(p: *const T, what: &str) -> Result<&'a T, (WlStatus, String)> {
    // SAFETY: callers pass either null or a pointer obtained from this library.
    unsafe { p.as_ref() }.ok_or_else(|| (WlStatus::NullPointer, format!("{what} is null")))
}

fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (WlStatus, String)> {
    if p.is_null() {
        return Err((WlStatus::NullPointer, format!("{what} is null")));
    }
    // SAFETY: non-null and documented as a NUL-terminated string.
    unsafe { CStr::from_ptr(p) }.to_str().map_err(|_| (WlStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn slice_arg<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], (WlStatus, String)> {
    if p.is_null() {
        return Err((WlStatus::NullPointer, format!("{what} is null")));
    }
    // SAFETY: non-null and documented to point at `len` doubles.
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

fn check_len(len: usize, want: usize, what: &str) -> Result<(), (WlStatus, String)> {
    if len != want {
        return Err((WlStatus::InvalidInput, format!("{what} has length {len}, expected {want}")));
    }
    Ok(())
}

fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), (WlStatus, String)> {
    if out.is_null() {
        return Err((WlStatus::NullPointer, format!("{what} is null")));
    }
    // SAFETY: non-null out-parameter supplied by the caller.
    unsafe { out.write(value) };
    Ok(())
}

fn write_string(out: *mut *mut c_char, s: String) -> Result<(), (WlStatus, String)> {
    let c = CString::new(s).map_err(|_| (WlStatus::Numerical, "output contains NUL".to_string()))?;
    write_out(out, c.into_raw(), "output string pointer")
}

fn write_vector(values: &[f64], out: *mut f64, capacity: usize, out_len: *mut usize) -> Result<(), (WlStatus, String)> {
    write_out(out_len, values.len(), "out_len")?;
    if capacity < values.len() {
        return Err((WlStatus::BufferTooSmall, format!("buffer holds {capacity}, need {}", values.len())));
    }
    if out.is_null() {
        return Err((WlStatus::NullPointer, "output buffer is null".into()));
    }
    // SAFETY: non-null with room for `capacity >= values.len()` doubles.
    unsafe { ptr::copy_nonoverlapping(values.as_ptr(), out, values.len()) };
    Ok(())
}

/// Message of the last failing call on this thread. Empty if none. The pointer stays valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn wl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn wl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from a `char **` out-parameter of this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn wl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Named family on `S^{ambient_dim-1}` (`isotropic`, `quadratic-norm:1,1,4`, ...), audited
/// for convexity.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn wl_anisotropy_from_name(
    name: *const c_char,
    ambient_dim: usize,
    out: *mut *mut WlAnisotropy,
) -> WlStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        let inner = lib(anisotropy_by_name(name, ambient_dim))?;
        write_out(out, Box::into_raw(Box::new(WlAnisotropy { inner })), "out")
    })
}

/// Anisotropy from its JSON description. Not audited; see [`wl_anisotropy_audit_json`].
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn wl_anisotropy_from_json(json: *const c_char, out: *mut *mut WlAnisotropy) -> WlStatus {
    guard(|| {
        let json = str_arg(json, "json")?;
        let inner = lib(AnisotropyFunction::from_json(json))?;
        write_out(out, Box::into_raw(Box::new(WlAnisotropy { inner })), "out")
    })
}

/// # Safety
/// `f` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn wl_anisotropy_free(f: *mut WlAnisotropy) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Dimension of the ambient space, or 0 for a null handle.
///
/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wl_anisotropy_ambient_dim(f: *const WlAnisotropy) -> usize {
    f.as_ref().map_or(0, |f| f.inner.ambient_dim())
}

/// JSON description of the anisotropy, loadable by [`wl_anisotropy_from_json`].
///
/// # Safety
/// `f` must be a live handle; `out_json` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn wl_anisotropy_to_json(f: *const WlAnisotropy, out_json: *mut *mut c_char) -> WlStatus {
    guard(|| {
        let f = non_null(f, "anisotropy")?;
        write_string(out_json, f.inner.to_json())
    })
}

/// `F(u)` at a unit vector of length `ambient_dim`.
///
/// # Safety
/// `f` must be a live handle; `u` must point at `len` doubles; `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn wl_anisotropy_value(f: *const WlAnisotropy, u: *const f64, len: usize, out: *mut f64) -> WlStatus {
    guard(|| {
        let f = non_null(f, "anisotropy")?;
        let u = slice_arg(u, len, "u")?;
        check_len(len, f.inner.ambient_dim(), "u")?;
        let v = lib(f.inner.value(&DVector::from_column_slice(u)))?;
        write_out(out, v, "out")
    })
}

/// Wulff map `φ(u)`; writes `ambient_dim` doubles to `out`.
///
/// # Safety
/// `f` must be a live handle; `u` and `out` must each hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn wl_anisotropy_phi(f: *const WlAnisotropy, u: *const f64, len: usize, out: *mut f64) -> WlStatus {
    guard(|| {
        let f = non_null(f, "anisotropy")?;
        let u = slice_arg(u, len, "u")?;
        check_len(len, f.inner.ambient_dim(), "u")?;
        let phi = lib(f.inner.phi(&DVector::from_column_slice(u)))?;
        let mut written = 0;
        write_vector(phi.as_slice(), out, len, &mut written)
    })
}

/// Dual norm `F*(y)` for any nonzero `y`.
///
/// # Safety
/// `f` must be a live handle; `y` must point at `len` doubles; `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn wl_anisotropy_dual_norm(f: *const WlAnisotropy, y: *const f64, len: usize, out: *mut f64) -> WlStatus {
    guard(|| {
        let f = non_null(f, "anisotropy")?;
        let y = slice_arg(y, len, "y")?;
        check_len(len, f.inner.ambient_dim(), "y")?;
        let d = lib(f.inner.dual_norm(&DVector::from_column_slice(y)))?;
        write_out(out, d.value, "out")
    })
}

/// Convexity audit on a sphere grid, as a JSON report. A failing audit is still `Ok`;
/// inspect the `pass` field.
///
/// # Safety
/// `f` must be a live handle; `out_json` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn wl_anisotropy_audit_json(
    f: *const WlAnisotropy,
    grid_resolution: usize,
    out_json: *mut *mut c_char,
) -> WlStatus {
    guard(|| {
        let f = non_null(f, "anisotropy")?;
        let report = lib(f.inner.convexity_audit(grid_resolution))?;
        let json = serde_json::to_string(&report).map_err(|e| (WlStatus::Numerical, e.to_string()))?;
        write_string(out_json, json)
    })
}

/// Catalog patch by name (`plane`, `wulff`, `cylinder:k=1,t=0.5`, `helicoid`, ...) for `f`.
/// The entry keeps its own copy of the anisotropy.
///
/// # Safety
/// `f` must be a live handle; `name` a NUL-terminated string; `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn wl_entry_new(f: *const WlAnisotropy, name: *const c_char, out: *mut *mut WlEntry) -> WlStatus {
    guard(|| {
        let f = non_null(f, "anisotropy")?;
        let name = str_arg(name, "name")?;
        let inner = lib(entry(&f.inner, name))?;
        write_out(out, Box::into_raw(Box::new(WlEntry { inner })), "out")
    })
}

/// # Safety
/// `e` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn wl_entry_free(e: *mut WlEntry) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// Number of chart parameters `n`, or 0 for a null handle.
///
/// # Safety
/// `e` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wl_entry_chart_dim(e: *const WlEntry) -> usize {
    e.as_ref().map_or(0, |e| e.inner.patch.chart_dim())
}

/// Anisotropic principal curvatures at chart point `params`, descending. Writes `n` values
/// to `out` and `n` to `out_len`; if `capacity < n` returns `BufferTooSmall` with `out_len` set.
///
/// # Safety
/// `e` must be a live handle; `params` must point at `len` doubles; `out` must hold
/// `capacity` doubles; `out_len` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn wl_entry_curvatures(
    e: *const WlEntry,
    params: *const f64,
    len: usize,
    out: *mut f64,
    capacity: usize,
    out_len: *mut usize,
) -> WlStatus {
    guard(|| {
        let e = non_null(e, "entry")?;
        let p = slice_arg(params, len, "params")?;
        check_len(len, e.inner.patch.chart_dim(), "params")?;
        let spec = lib(anisotropic_curvatures(&e.inner.anisotropy, &e.inner.patch, p))?;
        write_vector(&spec.lambdas, out, capacity, out_len)
    })
}

/// Classification verdict over a `grid_resolution`-per-axis chart grid, as JSON.
/// `complete` asserts that the patch is a piece of a complete hypersurface.
///
/// # Safety
/// `e` must be a live handle; `out_json` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn wl_entry_classify_json(
    e: *const WlEntry,
    grid_resolution: usize,
    complete: bool,
    out_json: *mut *mut c_char,
) -> WlStatus {
    guard(|| {
        let e = non_null(e, "entry")?;
        if grid_resolution == 0 {
            return Err((WlStatus::InvalidInput, "grid_resolution must be positive".into()));
        }
        let grid = e.inner.patch.chart_grid(grid_resolution);
        let verdict = lib(classify(&e.inner.anisotropy, &e.inner.patch, &grid, complete))?;
        let json = serde_json::to_string(&verdict).map_err(|e| (WlStatus::Numerical, e.to_string()))?;
        write_string(out_json, json)
    })
}
