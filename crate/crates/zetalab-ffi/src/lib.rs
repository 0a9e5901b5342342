//! C interface to zetalab.
//!
//! Objects are opaque handles created by `zl_*_new` and released by the
//! matching `zl_*_free`. Every fallible call returns an `int32_t` status
//! (`ZL_OK` on success, a negative `ZL_ERR_*` code otherwise) and writes
//! results through caller-provided pointers. The message for the most recent
//! failure on the calling thread is available from `zl_last_error`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use zetalab::circular::{self, VerblunskySample};
use zetalab::dirac::{bessel_spec, sine_spec, BesselPath, DiracSpec, SinePath};
use zetalab::sde::{self, BrownianDriver, SdeConfig};
use zetalab::secular::{taylor_coeffs, zeta_ode, zeta_taylor, ZetaValue};
use zetalab::{Error, C64};

pub const ZL_OK: i32 = 0;
/// A required pointer argument was null.
pub const ZL_ERR_NULL: i32 = -1;
/// An argument was outside the domain of the operation.
pub const ZL_ERR_DOMAIN: i32 = -2;
/// A numerical procedure failed (overflow, non-convergence, LAPACK error).
pub const ZL_ERR_NUMERIC: i32 = -3;
/// An output buffer was too small; the required length has been written.
pub const ZL_ERR_BUFFER: i32 = -4;
/// An internal error was caught at the boundary.
pub const ZL_ERR_INTERNAL: i32 = -5;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZlComplex {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for ZlComplex {
    fn from(c: C64) -> Self {
        ZlComplex { re: c.re, im: c.im }
    }
}

impl From<ZlComplex> for C64 {
    fn from(c: ZlComplex) -> Self {
        C64::new(c.re, c.im)
    }
}

enum Spec {
    Sine(DiracSpec<SinePath>),
    Bessel(DiracSpec<BesselPath>),
}

/// A deterministic Dirac operator (sine or Bessel).
pub struct ZlOperator(Spec);

/// A seeded Brownian driver for one replicate of the stochastic operator.
pub struct ZlDriver(BrownianDriver);

/// One sample of the circular β ensemble.
pub struct ZlCircular(VerblunskySample);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn code(e: &Error) -> i32 {
    match e {
        Error::Domain(_) | Error::InvalidSpec(_) => ZL_ERR_DOMAIN,
        _ => ZL_ERR_NUMERIC,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), i32>>(f: F) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ZL_OK,
        Ok(Err(c)) => c,
        Err(_) => {
            set_error("internal error".into());
            ZL_ERR_INTERNAL
        }
    }
}

fn lib<T>(r: zetalab::Result<T>) -> Result<T, i32> {
    r.map_err(|e| {
        let c = code(&e);
        set_error(e.to_string());
        c
    })
}

fn nonnull<T>(p: *const T, name: &str) -> Result<(), i32> {
    if p.is_null() {
        set_error(format!("{name} is null"));
        Err(ZL_ERR_NULL)
    } else {
        Ok(())
    }
}

/// Copies `src` into the caller's buffer, reporting the length either way.
///
/// # Safety
/// `out` must be valid for `cap` writes and `len` for one write.
unsafe fn fill<T: Copy>(src: &[T], out: *mut T, cap: usize, len: *mut usize) -> Result<(), i32> {
    *len = src.len();
    if src.len() > cap {
        set_error(format!("buffer holds {cap} values, {} needed", src.len()));
        return Err(ZL_ERR_BUFFER);
    }
    if !src.is_empty() {
        nonnull(out, "output buffer")?;
        std::ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    }
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn zl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `cap` bytes) and returns the full message length.
///
/// # Safety
/// `buf` must be null or valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn zl_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let bytes = e.borrow();
        let bytes = bytes.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Sine operator of length `sigma` with boundary parameter `q`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn zl_operator_new_sine(sigma: f64, q: f64, out: *mut *mut ZlOperator) -> i32 {
    guard(|| {
        nonnull(out, "out")?;
        if !(sigma > 0.0 && sigma.is_finite()) {
            return lib(Err(Error::Domain(format!("σ = {sigma} must be positive"))));
        }
        let spec = lib(sine_spec(sigma, q))?;
        *out = Box::into_raw(Box::new(ZlOperator(Spec::Sine(spec))));
        Ok(())
    })
}

/// Bessel operator of length `sigma` and index `alpha > 0`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn zl_operator_new_bessel(sigma: f64, alpha: f64, out: *mut *mut ZlOperator) -> i32 {
    guard(|| {
        nonnull(out, "out")?;
        if !(sigma > 0.0 && sigma.is_finite()) {
            return lib(Err(Error::Domain(format!("σ = {sigma} must be positive"))));
        }
        let spec = lib(bessel_spec(sigma, alpha))?;
        *out = Box::into_raw(Box::new(ZlOperator(Spec::Bessel(spec))));
        Ok(())
    })
}

/// Releases an operator. Null is ignored.
///
/// # Safety
/// `op` must be null or a handle from `zl_operator_new_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn zl_operator_free(op: *mut ZlOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Secular function by the ODE route. `err_estimate` may be null.
///
/// # Safety
/// `op` must be a live handle; `out` valid for one write; `err_estimate`
/// null or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn zl_zeta_ode(op: *const ZlOperator, z: ZlComplex, out: *mut ZlComplex, err_estimate: *mut f64) -> i32 {
    guard(|| {
        nonnull(op, "operator")?;
        nonnull(out, "out")?;
        let v: ZetaValue = lib(match &(*op).0 {
            Spec::Sine(s) => zeta_ode(s, z.into(), None),
            Spec::Bessel(s) => zeta_ode(s, z.into(), None),
        })?;
        *out = v.value.into();
        if !err_estimate.is_null() {
            *err_estimate = v.err_estimate;
        }
        Ok(())
    })
}

/// Secular function by its Taylor series with `n_max` coefficients, to
/// absolute tolerance `tol`.
///
/// # Safety
/// As for `zl_zeta_ode`.
#[no_mangle]
pub unsafe extern "C" fn zl_zeta_taylor(
    op: *const ZlOperator,
    n_max: usize,
    tol: f64,
    z: ZlComplex,
    out: *mut ZlComplex,
    err_estimate: *mut f64,
) -> i32 {
    guard(|| {
        nonnull(op, "operator")?;
        nonnull(out, "out")?;
        let tc = lib(match &(*op).0 {
            Spec::Sine(s) => taylor_coeffs(s, n_max),
            Spec::Bessel(s) => taylor_coeffs(s, n_max),
        })?;
        let v = lib(zeta_taylor(&tc, z.into(), tol))?;
        *out = v.value.into();
        if !err_estimate.is_null() {
            *err_estimate = v.err_estimate;
        }
        Ok(())
    })
}

/// Driver for replicate `replicate` of `seed` on [ν, 0] with step `h`,
/// where ν = (4/β) log `delta`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn zl_driver_new(
    seed: u64,
    replicate: u64,
    beta: f64,
    delta: f64,
    h: f64,
    out: *mut *mut ZlDriver,
) -> i32 {
    guard(|| {
        nonnull(out, "out")?;
        let c = lib(SdeConfig::with_truncation(beta, delta, h))?;
        *out = Box::into_raw(Box::new(ZlDriver(sde::make_driver(seed, replicate, c))));
        Ok(())
    })
}

/// Releases a driver. Null is ignored.
///
/// # Safety
/// `d` must be null or a handle from `zl_driver_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn zl_driver_free(d: *mut ZlDriver) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Samples ζ_ν at `n` points sharing the driver; writes ζ_ν(z_k) to
/// `zeta[k]`, ℰ_ν(z_k) to `e` when non-null, and the boundary parameter q.
///
/// # Safety
/// `d` must be a live handle; `z` and `zeta` valid for `n` elements; `e`
/// null or valid for `n` writes; `q` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn zl_sample_zeta(
    d: *const ZlDriver,
    z: *const ZlComplex,
    n: usize,
    zeta: *mut ZlComplex,
    e: *mut ZlComplex,
    q: *mut f64,
) -> i32 {
    guard(|| {
        nonnull(d, "driver")?;
        nonnull(q, "q")?;
        if n > 0 {
            nonnull(z, "z")?;
            nonnull(zeta, "zeta")?;
        }
        let zs: Vec<C64> = if n == 0 { Vec::new() } else { std::slice::from_raw_parts(z, n).iter().map(|&c| c.into()).collect() };
        let s = lib(sde::sample_zeta(&(*d).0, &zs))?;
        for k in 0..n {
            *zeta.add(k) = s.zeta(k).into();
            if !e.is_null() {
                *e.add(k) = s.e(k).into();
            }
        }
        *q = s.q;
        Ok(())
    })
}

/// Eigenvalues in [−r, r] of the driver's truncated operator, ascending.
/// On `ZL_ERR_BUFFER`, `len` holds the number needed.
///
/// # Safety
/// `d` must be a live handle; `out` valid for `cap` writes; `len` for one.
#[no_mangle]
pub unsafe extern "C" fn zl_sample_eigenvalues(d: *const ZlDriver, r: f64, out: *mut f64, cap: usize, len: *mut usize) -> i32 {
    guard(|| {
        nonnull(d, "driver")?;
        nonnull(len, "len")?;
        let s = lib(sde::sample_sine_beta(&(*d).0, r))?;
        fill(&s.eigenvalues, out, cap, len)
    })
}

/// Circular β ensemble of size `n` from `seed`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn zl_circular_new(n: usize, beta: f64, seed: u64, out: *mut *mut ZlCircular) -> i32 {
    guard(|| {
        nonnull(out, "out")?;
        let s = lib(circular::sample_verblunsky(n, beta, seed))?;
        *out = Box::into_raw(Box::new(ZlCircular(s)));
        Ok(())
    })
}

/// Releases a circular sample. Null is ignored.
///
/// # Safety
/// `c` must be null or a handle from `zl_circular_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn zl_circular_free(c: *mut ZlCircular) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// ℰ_n(z) = p_n(e^{iz/n})e^{−iz/2}.
///
/// # Safety
/// `c` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn zl_circular_char_poly(c: *const ZlCircular, z: ZlComplex, out: *mut ZlComplex) -> i32 {
    guard(|| {
        nonnull(c, "sample")?;
        nonnull(out, "out")?;
        *out = lib(circular::char_poly(&(*c).0, z.into()))?.into();
        Ok(())
    })
}

/// Eigenangles in (0, 2π), ascending. On `ZL_ERR_BUFFER`, `len` holds the
/// number needed.
///
/// # Safety
/// `c` must be a live handle; `out` valid for `cap` writes; `len` for one.
#[no_mangle]
pub unsafe extern "C" fn zl_circular_eigenangles(c: *const ZlCircular, out: *mut f64, cap: usize, len: *mut usize) -> i32 {
    guard(|| {
        nonnull(c, "sample")?;
        nonnull(len, "len")?;
        let a = lib(circular::eigenangles(&(*c).0))?;
        fill(&a, out, cap, len)
    })
}
