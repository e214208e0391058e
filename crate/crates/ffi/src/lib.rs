//! C ABI over the `singlecopy` library.
//!
//! Models and spectra are opaque heap handles released with their `_free`
//! function. Every call returns an [`ScStatus`]; on failure the message is
//! available from [`sc_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use singlecopy::cli::{validate_battery, VALIDATION_TOLERANCE};
use singlecopy::model::Universality;
use singlecopy::offcritical::{self, Branch};
use singlecopy::{block_spectrum, report, Error, ModelSpec, SingleParticleSpectrum};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidModel = 3,
    Domain = 4,
    SizeLimit = 5,
    Numerical = 6,
    ValidationFailed = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScUniversality {
    FreeFermionC1 = 0,
    IsingCHalf = 1,
    Gapped = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScBranch {
    LambdaBelow1 = 0,
    LambdaAbove1 = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScClass {
    pub is_critical: bool,
    /// NaN for gapped models.
    pub central_charge: f64,
    pub universality: ScUniversality,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScReport {
    pub block_len: usize,
    pub entropy: f64,
    pub log_inv_lambda1: f64,
    pub e1_floored: f64,
    pub lambda1: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScClosedForms {
    pub epsilon: f64,
    pub log_inv_lambda1_closed: f64,
    pub log_inv_lambda1_sum: f64,
    pub entropy_closed: f64,
    pub entropy_sum: f64,
    pub ratio: f64,
    pub log_inv_lambda1_phase: f64,
    pub entropy_phase: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScIntegrals {
    pub i_entropy: f64,
    pub i_single: f64,
    pub abs_error: f64,
}

/// Opaque chain parameters.
pub struct ScModel(ModelSpec);

/// Opaque single-particle spectrum.
pub struct ScSpectrum(SingleParticleSpectrum);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> ScStatus {
    match e {
        Error::InvalidModel(_)
        | Error::BmCircleViolation { .. }
        | Error::CriticalPoint { .. }
        | Error::ZeroAnisotropy
        | Error::NotIsotropic { .. } => ScStatus::InvalidModel,
        Error::Domain(_) => ScStatus::Domain,
        Error::SizeLimit { .. } => ScStatus::SizeLimit,
        Error::InvalidInput(_) | Error::InsufficientPoints { .. } => ScStatus::InvalidArgument,
        _ => ScStatus::Numerical,
    }
}

fn fail(e: Error) -> ScStatus {
    set_error(&e.to_string());
    status_of(&e)
}

fn null(what: &str) -> ScStatus {
    set_error(&format!("{what} is null"));
    ScStatus::NullPointer
}

fn guard(f: impl FnOnce() -> ScStatus) -> ScStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => {
            if status == ScStatus::Ok {
                set_error("");
            }
            status
        }
        Err(_) => {
            set_error("internal panic");
            ScStatus::Panic
        }
    }
}

/// Writes `value` through `out`.
///
/// # Safety
/// `out` must be null or valid for writes.
unsafe fn put<T>(out: *mut T, value: T) -> ScStatus {
    match out.as_mut() {
        Some(slot) => {
            *slot = value;
            ScStatus::Ok
        }
        None => null("output pointer"),
    }
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn sc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `out` must be valid for writes. The handle is released with
/// [`sc_model_free`].
#[no_mangle]
pub unsafe extern "C" fn sc_model_new(gamma: f64, lambda: f64, out: *mut *mut ScModel) -> ScStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        match ModelSpec::new(gamma, lambda) {
            Ok(m) => put(out, Box::into_raw(Box::new(ScModel(m)))),
            Err(e) => {
                *out = ptr::null_mut();
                fail(e)
            }
        }
    })
}

/// # Safety
/// `model` must be null or a handle from [`sc_model_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sc_model_free(model: *mut ScModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sc_model_classify(model: *const ScModel, out: *mut ScClass) -> ScStatus {
    guard(|| {
        let Some(m) = model.as_ref() else {
            return null("model");
        };
        let c = m.0.classify();
        let universality = match c.universality {
            Universality::FreeFermionC1 => ScUniversality::FreeFermionC1,
            Universality::IsingCHalf => ScUniversality::IsingCHalf,
            Universality::Gapped => ScUniversality::Gapped,
        };
        put(
            out,
            ScClass {
                is_critical: c.is_critical,
                central_charge: c.central_charge.unwrap_or(f64::NAN),
                universality,
            },
        )
    })
}

/// # Safety
/// `model` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sc_model_x_parameter(model: *const ScModel, out: *mut f64) -> ScStatus {
    guard(|| {
        let Some(m) = model.as_ref() else {
            return null("model");
        };
        match m.0.x_parameter() {
            Ok(x) => put(out, x),
            Err(e) => fail(e),
        }
    })
}

/// Spectrum of a block of `block_len` sites of the infinite chain.
///
/// # Safety
/// `model` must be a live handle and `out` valid for writes. The result is
/// released with [`sc_spectrum_free`].
#[no_mangle]
pub unsafe extern "C" fn sc_block_spectrum(
    model: *const ScModel,
    block_len: usize,
    out: *mut *mut ScSpectrum,
) -> ScStatus {
    guard(|| {
        let Some(m) = model.as_ref() else {
            return null("model");
        };
        if out.is_null() {
            return null("out");
        }
        match block_spectrum(&m.0, block_len) {
            Ok(s) => put(out, Box::into_raw(Box::new(ScSpectrum(s)))),
            Err(e) => {
                *out = ptr::null_mut();
                fail(e)
            }
        }
    })
}

/// Spectrum from caller-supplied values in [-1, 1].
///
/// # Safety
/// `values` must point to `len` readable doubles and `out` be valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn sc_spectrum_new(
    values: *const f64,
    len: usize,
    out: *mut *mut ScSpectrum,
) -> ScStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        if values.is_null() && len > 0 {
            return null("values");
        }
        let mu = if len == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(values, len).to_vec()
        };
        match SingleParticleSpectrum::new(mu) {
            Ok(s) => put(out, Box::into_raw(Box::new(ScSpectrum(s)))),
            Err(e) => {
                *out = ptr::null_mut();
                fail(e)
            }
        }
    })
}

/// # Safety
/// `spectrum` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sc_spectrum_free(spectrum: *mut ScSpectrum) {
    if !spectrum.is_null() {
        drop(Box::from_raw(spectrum));
    }
}

/// Number of values; 0 for a null handle.
///
/// # Safety
/// `spectrum` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sc_spectrum_len(spectrum: *const ScSpectrum) -> usize {
    spectrum.as_ref().map_or(0, |s| s.0.len())
}

/// Copies the values, sorted by decreasing magnitude, into `buf`.
///
/// # Safety
/// `spectrum` must be a live handle and `buf` valid for `capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn sc_spectrum_values(
    spectrum: *const ScSpectrum,
    buf: *mut f64,
    capacity: usize,
) -> ScStatus {
    guard(|| {
        let Some(s) = spectrum.as_ref() else {
            return null("spectrum");
        };
        let mu = s.0.mu();
        if capacity < mu.len() {
            set_error(&format!("buffer holds {capacity} values, need {}", mu.len()));
            return ScStatus::InvalidArgument;
        }
        if buf.is_null() && !mu.is_empty() {
            return null("buf");
        }
        if !mu.is_empty() {
            ptr::copy_nonoverlapping(mu.as_ptr(), buf, mu.len());
        }
        ScStatus::Ok
    })
}

/// # Safety
/// `spectrum` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sc_spectrum_report(spectrum: *const ScSpectrum, out: *mut ScReport) -> ScStatus {
    guard(|| {
        let Some(s) = spectrum.as_ref() else {
            return null("spectrum");
        };
        match report(&s.0) {
            Ok(r) => put(
                out,
                ScReport {
                    block_len: r.block_len,
                    entropy: r.entropy,
                    log_inv_lambda1: r.log_inv_lambda1,
                    e1_floored: r.e1_floored,
                    lambda1: r.lambda1,
                },
            ),
            Err(e) => fail(e),
        }
    })
}

/// Complete elliptic integral of the first kind, modulus `x`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sc_elliptic_k(x: f64, out: *mut f64) -> ScStatus {
    guard(|| match offcritical::elliptic_k(x) {
        Ok(k) => put(out, k),
        Err(e) => fail(e),
    })
}

/// Level spacing of a gapped model outside the circle. `branch_out` may be
/// null.
///
/// # Safety
/// `model` must be a live handle, `epsilon_out` valid for writes and
/// `branch_out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sc_epsilon(
    model: *const ScModel,
    epsilon_out: *mut f64,
    branch_out: *mut ScBranch,
) -> ScStatus {
    guard(|| {
        let Some(m) = model.as_ref() else {
            return null("model");
        };
        match offcritical::epsilon_of(&m.0) {
            Ok(p) => {
                if let Some(b) = branch_out.as_mut() {
                    *b = match p.branch {
                        Branch::LambdaBelow1 => ScBranch::LambdaBelow1,
                        Branch::LambdaAbove1 => ScBranch::LambdaAbove1,
                    };
                }
                put(epsilon_out, p.epsilon)
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sc_closed_forms(epsilon: f64, branch: ScBranch, out: *mut ScClosedForms) -> ScStatus {
    guard(|| {
        let branch = match branch {
            ScBranch::LambdaBelow1 => Branch::LambdaBelow1,
            ScBranch::LambdaAbove1 => Branch::LambdaAbove1,
        };
        match offcritical::closed_forms_at(epsilon, branch) {
            Ok(r) => put(
                out,
                ScClosedForms {
                    epsilon: r.epsilon,
                    log_inv_lambda1_closed: r.log_inv_lambda1_closed,
                    log_inv_lambda1_sum: r.log_inv_lambda1_sum,
                    entropy_closed: r.entropy_closed,
                    entropy_sum: r.entropy_sum,
                    ratio: r.ratio,
                    log_inv_lambda1_phase: r.log_inv_lambda1_phase,
                    entropy_phase: r.entropy_phase,
                },
            ),
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sc_fisher_hartwig_integrals(out: *mut ScIntegrals) -> ScStatus {
    guard(|| match singlecopy::cft::fisher_hartwig_integrals() {
        Ok(fh) => put(
            out,
            ScIntegrals {
                i_entropy: fh.i_entropy,
                i_single: fh.i_single,
                abs_error: fh.abs_error,
            },
        ),
        Err(e) => fail(e),
    })
}

/// Free-fermion vs exact-diagonalization check over the model battery.
/// Writes the largest deviation and returns `VALIDATION_FAILED` when it
/// exceeds 1e-8.
///
/// # Safety
/// `max_deviation_out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sc_validate(n_sites: usize, max_deviation_out: *mut f64) -> ScStatus {
    guard(|| {
        if max_deviation_out.is_null() {
            return null("max_deviation_out");
        }
        match validate_battery(n_sites) {
            Ok(lines) => {
                let worst = lines.iter().map(|l| l.max_deviation).fold(0.0, f64::max);
                *max_deviation_out = worst;
                if worst <= VALIDATION_TOLERANCE {
                    ScStatus::Ok
                } else {
                    set_error(&format!("max deviation {worst:e} above {VALIDATION_TOLERANCE:e}"));
                    ScStatus::ValidationFailed
                }
            }
            Err(e) => fail(e),
        }
    })
}
