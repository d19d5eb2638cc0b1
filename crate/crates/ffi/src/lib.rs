//! C ABI over the `zigzag` crate.
//!
//! Objects are opaque handles created by `zz_*_new`/`zz_*_from_*` and released
//! with the matching `zz_*_free`. Every fallible call returns a [`ZzStatus`];
//! the message of the last failure on the calling thread is available through
//! [`zz_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use zigzag::eigenfunctions::build_flatband_with;
use zigzag::lyapunov::{delta0_from_matrix, SectorConstants};
use zigzag::spectra::{BandStructure, SpectralSolver};
use zigzag::tolerances::Tolerances;
use zigzag::{Complex64, Error, Potential};

/// Result codes of the C API.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZzStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidPotential = 3,
    DirichletPole = 4,
    Computation = 5,
    OutOfRange = 6,
    Panic = 7,
}

/// Opaque potential handle.
pub struct ZzPotential {
    inner: Potential,
}

/// Opaque band-structure handle.
pub struct ZzBands {
    inner: BandStructure,
    bands: Vec<(f64, f64)>,
    gaps: Vec<(usize, f64, f64)>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> ZzStatus {
    match e {
        Error::Domain(_) | Error::LevelRange(_) | Error::Precondition(_) => ZzStatus::InvalidArgument,
        Error::InvalidPotential(_) => ZzStatus::InvalidPotential,
        Error::DirichletPole { .. } => ZzStatus::DirichletPole,
        _ => ZzStatus::Computation,
    }
}

fn guard(f: impl FnOnce() -> Result<(), ZzStatus>) -> ZzStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ZzStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("panic inside zigzag");
            ZzStatus::Panic
        }
    }
}

fn fail(e: Error) -> ZzStatus {
    let status = status_of(&e);
    set_error(e.to_string());
    status
}

fn null(what: &str) -> ZzStatus {
    set_error(format!("{what} is null"));
    ZzStatus::NullPointer
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, ZzStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(p: *mut T, value: T, what: &str) -> Result<(), ZzStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(value);
    Ok(())
}

/// Copies the last error message into `buf` (NUL-terminated, truncated to
/// `len`). Returns the full message length in bytes, 0 if there is none.
///
/// # Safety
/// `buf` must be valid for `len` bytes or null.
#[no_mangle]
pub unsafe extern "C" fn zz_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn zz_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Parses a potential from its JSON description.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn zz_potential_from_json(json: *const c_char, out: *mut *mut ZzPotential) -> ZzStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json).to_str().map_err(|e| {
            set_error(format!("json is not UTF-8: {e}"));
            ZzStatus::InvalidArgument
        })?;
        let inner = Potential::from_json(text).map_err(fail)?;
        write(out, Box::into_raw(Box::new(ZzPotential { inner })), "out")
    })
}

/// The constant potential `q = c`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn zz_potential_constant(c: f64, out: *mut *mut ZzPotential) -> ZzStatus {
    guard(|| {
        if !c.is_finite() {
            set_error(format!("constant {c} is not finite"));
            return Err(ZzStatus::InvalidPotential);
        }
        write(out, Box::into_raw(Box::new(ZzPotential { inner: Potential::constant(c) })), "out")
    })
}

/// # Safety
/// `p` must come from a `zz_potential_*` constructor or be null.
#[no_mangle]
pub unsafe extern "C" fn zz_potential_free(p: *mut ZzPotential) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// `Δ₀(λ)` at complex `λ = re + i·im`.
///
/// # Safety
/// `p` must be a live handle; the output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn zz_delta0(p: *const ZzPotential, re: f64, im: f64, out_re: *mut f64, out_im: *mut f64) -> ZzStatus {
    guard(|| {
        let p = deref(p, "potential")?;
        let m = zigzag::hill::transfer_matrix(&p.inner, Complex64::new(re, im)).map_err(fail)?;
        let d = delta0_from_matrix(&m);
        write(out_re, d.re, "out_re")?;
        write(out_im, d.im, "out_im")
    })
}

/// Sector monodromy `M_k(λ)` as eight doubles: row-major entries, each as
/// `(re, im)`.
///
/// # Safety
/// `p` must be a live handle; `out` must be writable for eight doubles.
#[no_mangle]
pub unsafe extern "C" fn zz_monodromy_k(
    p: *const ZzPotential,
    re: f64,
    im: f64,
    k: usize,
    n_chains: usize,
    out: *mut f64,
) -> ZzStatus {
    guard(|| {
        let p = deref(p, "potential")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let sector = SectorConstants::new(k, n_chains).map_err(fail)?;
        let mk = zigzag::lyapunov::monodromy_k(&p.inner, Complex64::new(re, im), &sector).map_err(fail)?;
        for (i, e) in mk.entries.iter().flatten().enumerate() {
            *out.add(2 * i) = e.re;
            *out.add(2 * i + 1) = e.im;
        }
        Ok(())
    })
}

/// Assembles the band structure of the `N`-chain tube up to `lambda_max`.
///
/// # Safety
/// `p` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn zz_bands_assemble(
    p: *const ZzPotential,
    n_chains: usize,
    lambda_max: f64,
    out: *mut *mut ZzBands,
) -> ZzStatus {
    guard(|| {
        let p = deref(p, "potential")?;
        if !(lambda_max > 0.0 && lambda_max.is_finite()) {
            set_error(format!("lambda_max must be positive, got {lambda_max}"));
            return Err(ZzStatus::InvalidArgument);
        }
        let inner = SpectralSolver::with_tolerances(p.inner.clone(), Tolerances::default())
            .assemble_bands(n_chains, lambda_max)
            .map_err(fail)?;
        let bands = inner.clipped_bands();
        let gaps = inner.open_gaps().iter().map(|g| (g.n, g.interval.0, g.interval.1)).collect();
        write(out, Box::into_raw(Box::new(ZzBands { inner, bands, gaps })), "out")
    })
}

/// # Safety
/// `b` must come from [`zz_bands_assemble`] or be null.
#[no_mangle]
pub unsafe extern "C" fn zz_bands_free(b: *mut ZzBands) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

/// Number of global bands below `lambda_max`.
///
/// # Safety
/// `b` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn zz_bands_count(b: *const ZzBands, out: *mut usize) -> ZzStatus {
    guard(|| write(out, deref(b, "bands")?.bands.len(), "out"))
}

/// Endpoints of band `index` (0-based), clipped to `lambda_max`.
///
/// # Safety
/// `b` must be a live handle; the output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn zz_bands_get(b: *const ZzBands, index: usize, lo: *mut f64, hi: *mut f64) -> ZzStatus {
    guard(|| {
        let b = deref(b, "bands")?;
        let &(a, z) = b.bands.get(index).ok_or_else(|| {
            set_error(format!("band index {index} out of range (count {})", b.bands.len()));
            ZzStatus::OutOfRange
        })?;
        write(lo, a, "lo")?;
        write(hi, z, "hi")
    })
}

/// Number of open gaps below `lambda_max`.
///
/// # Safety
/// `b` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn zz_bands_gap_count(b: *const ZzBands, out: *mut usize) -> ZzStatus {
    guard(|| write(out, deref(b, "bands")?.gaps.len(), "out"))
}

/// Label `n` and endpoints of open gap `index` (0-based).
///
/// # Safety
/// `b` must be a live handle; the output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn zz_bands_gap_get(
    b: *const ZzBands,
    index: usize,
    n: *mut usize,
    lo: *mut f64,
    hi: *mut f64,
) -> ZzStatus {
    guard(|| {
        let b = deref(b, "bands")?;
        let &(label, a, z) = b.gaps.get(index).ok_or_else(|| {
            set_error(format!("gap index {index} out of range (count {})", b.gaps.len()));
            ZzStatus::OutOfRange
        })?;
        write(n, label, "n")?;
        write(lo, a, "lo")?;
        write(hi, z, "hi")
    })
}

/// Number of flat bands (Dirichlet eigenvalues) below `lambda_max`.
///
/// # Safety
/// `b` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn zz_bands_flat_count(b: *const ZzBands, out: *mut usize) -> ZzStatus {
    guard(|| write(out, deref(b, "bands")?.inner.flat_bands.len(), "out"))
}

/// Flat band `index` (0-based).
///
/// # Safety
/// `b` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn zz_bands_flat_get(b: *const ZzBands, index: usize, out: *mut f64) -> ZzStatus {
    guard(|| {
        let b = deref(b, "bands")?;
        let mu = *b.inner.flat_bands.get(index).ok_or_else(|| {
            set_error(format!("flat band index {index} out of range (count {})", b.inner.flat_bands.len()));
            ZzStatus::OutOfRange
        })?;
        write(out, mu, "out")
    })
}

/// Band structure as a JSON string; release it with [`zz_string_free`].
///
/// # Safety
/// `b` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn zz_bands_to_json(b: *const ZzBands, out: *mut *mut c_char) -> ZzStatus {
    guard(|| {
        let json = deref(b, "bands")?.inner.to_json();
        let s = CString::new(json).expect("JSON has no interior NUL");
        write(out, s.into_raw(), "out")
    })
}

/// # Safety
/// `s` must come from a `zz_*` function returning an owned string, or be null.
#[no_mangle]
pub unsafe extern "C" fn zz_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Kirchhoff residual of the flat-band eigenfunction at the Dirichlet
/// eigenvalue `mu` in sector `k`.
///
/// # Safety
/// `p` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn zz_flatband_residual(
    p: *const ZzPotential,
    mu: f64,
    k: usize,
    n_chains: usize,
    out: *mut f64,
) -> ZzStatus {
    guard(|| {
        let p = deref(p, "potential")?;
        let hill = zigzag::hill::HillSolver::new(p.inner.clone());
        let f = build_flatband_with(&hill, mu, k, n_chains, Tolerances::default()).map_err(fail)?;
        let r = f.kirchhoff_residual(&hill).map_err(fail)?;
        write(out, r, "out")
    })
}
