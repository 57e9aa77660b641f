//! C ABI over the `dnakagami` library.
//!
//! Parameter sets live behind opaque handles created by `dnk_*_new` and
//! released with the matching `dnk_*_free`. Every fallible call returns a
//! [`DnkStatus`] and writes its result through an out-pointer; on failure the
//! out-pointer is left untouched and `dnk_last_error_message` describes the
//! problem. Handles are immutable and may be shared between threads.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use dnakagami::{DoubleNakagamiParams, Error, KeyholeConfig, Method, QuadratureSpec};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DnkStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Invalid parameters or configuration.
    Config = 2,
    /// An argument is outside the domain of the function.
    Domain = 3,
    /// Adaptive quadrature did not reach its tolerance.
    Convergence = 4,
    /// The crossing rate underflowed, so the fade duration is undefined.
    Underflow = 5,
    /// An internal numerical self-check failed.
    Consistency = 6,
    /// A Rust panic was caught at the boundary.
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DnkMethod {
    Exact = 0,
    Laplace = 1,
}

impl From<DnkMethod> for Method {
    fn from(m: DnkMethod) -> Self {
        match m {
            DnkMethod::Exact => Method::Exact,
            DnkMethod::Laplace => Method::Laplace,
        }
    }
}

/// Adaptive quadrature settings. Pass NULL wherever one is accepted to use
/// the library defaults (1e-12 absolute, 1e-10 relative, 200 subdivisions).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DnkQuadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

/// Keyhole channel description, copied into a handle by `dnk_keyhole_new`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DnkKeyholeParams {
    pub tx_antennas: u32,
    pub rx_antennas: u32,
    pub m_t: f64,
    pub m_r: f64,
    pub omega_t: f64,
    pub omega_r: f64,
    pub f_alpha: f64,
    pub f_beta: f64,
    pub stbc_rate: f64,
    pub avg_snr: f64,
}

/// Opaque double Nakagami-m parameter set.
pub struct DnkDouble(DoubleNakagamiParams);

/// Opaque keyhole channel configuration.
pub struct DnkKeyhole(KeyholeConfig);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> DnkStatus {
    match e {
        Error::Config(_) | Error::Mismatch(_) => DnkStatus::Config,
        Error::Domain(_) => DnkStatus::Domain,
        Error::Convergence { .. } => DnkStatus::Convergence,
        Error::Underflow(_) => DnkStatus::Underflow,
        Error::Consistency(_) => DnkStatus::Consistency,
    }
}

/// Runs `f`, storing its value in `out`, and turns errors and panics into
/// status codes.
fn guard<T>(out: *mut T, f: impl FnOnce() -> Result<T, Error>) -> DnkStatus {
    if out.is_null() {
        set_last_error("output pointer is null");
        return DnkStatus::NullPointer;
    }
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(v)) => {
            // SAFETY: checked non-null above; the caller guarantees it is writable.
            unsafe { out.write(v) };
            DnkStatus::Ok
        }
        Ok(Err(e)) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic");
            DnkStatus::Panic
        }
    }
}

fn quadrature(spec: *const DnkQuadrature) -> Result<QuadratureSpec, Error> {
    // SAFETY: the caller passes NULL or a valid pointer.
    match unsafe { spec.as_ref() } {
        None => Ok(QuadratureSpec::default()),
        Some(q) => QuadratureSpec::new(q.abs_tol, q.rel_tol, q.max_subdivisions),
    }
}

macro_rules! handle {
    ($ptr:expr) => {
        // SAFETY: the caller passes NULL or a live handle from the matching constructor.
        match unsafe { $ptr.as_ref() } {
            Some(h) => &h.0,
            None => {
                set_last_error("handle is null");
                return DnkStatus::NullPointer;
            }
        }
    };
}

/// Message for the most recent failure on the calling thread, or "" if none.
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn dnk_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dnk_version() -> *const c_char {
    static VERSION: &CStr =
        match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
            Ok(v) => v,
            Err(_) => panic!("version contains NUL"),
        };
    VERSION.as_ptr()
}

/// Creates a double Nakagami-m parameter set Z = XY.
///
/// # Safety
/// `out` must be NULL or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn dnk_double_new(
    m_x: f64,
    m_y: f64,
    omega_x: f64,
    omega_y: f64,
    f_mx: f64,
    f_my: f64,
    out: *mut *mut DnkDouble,
) -> DnkStatus {
    guard(out, || {
        let p = DoubleNakagamiParams::from_parts(m_x, m_y, omega_x, omega_y, f_mx, f_my)?;
        Ok(Box::into_raw(Box::new(DnkDouble(p))))
    })
}

/// Releases a handle from `dnk_double_new`. NULL is ignored.
///
/// # Safety
/// `handle` must be NULL or an unreleased handle from `dnk_double_new`.
#[no_mangle]
pub unsafe extern "C" fn dnk_double_free(handle: *mut DnkDouble) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Level crossing rate N_Z(z) in crossings per second.
///
/// # Safety
/// `handle` must be a live handle, `spec` NULL or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dnk_double_lcr(
    handle: *const DnkDouble,
    z: f64,
    method: DnkMethod,
    spec: *const DnkQuadrature,
    out: *mut f64,
) -> DnkStatus {
    let p = handle!(handle);
    guard(out, || match method {
        DnkMethod::Exact => p.lcr_exact(z, &quadrature(spec)?),
        DnkMethod::Laplace => p.lcr_laplace(z),
    })
}

/// Average fade duration T_Z(z) in seconds.
///
/// # Safety
/// As for `dnk_double_lcr`.
#[no_mangle]
pub unsafe extern "C" fn dnk_double_afd(
    handle: *const DnkDouble,
    z: f64,
    method: DnkMethod,
    spec: *const DnkQuadrature,
    out: *mut f64,
) -> DnkStatus {
    let p = handle!(handle);
    guard(out, || {
        let q = quadrature(spec)?;
        match method {
            DnkMethod::Exact => p.afd_exact(z, &q),
            DnkMethod::Laplace => p.afd_laplace(z, &q),
        }
    })
}

/// CDF F_Z(z).
///
/// # Safety
/// As for `dnk_double_lcr`.
#[no_mangle]
pub unsafe extern "C" fn dnk_double_cdf(
    handle: *const DnkDouble,
    z: f64,
    spec: *const DnkQuadrature,
    out: *mut f64,
) -> DnkStatus {
    let p = handle!(handle);
    guard(out, || p.cdf(z, &quadrature(spec)?))
}

/// Envelope threshold z for a normalized threshold in dB,
/// 20 log10(z / sqrt((Ω_X/m_X)(Ω_Y/m_Y))).
///
/// # Safety
/// `handle` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dnk_double_threshold_from_db(
    handle: *const DnkDouble,
    db: f64,
    out: *mut f64,
) -> DnkStatus {
    let p = handle!(handle);
    guard(out, || Ok(p.threshold_from_db(db)))
}

/// Creates a keyhole channel handle from a parameter block.
///
/// # Safety
/// `params` must be NULL or valid for reading; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dnk_keyhole_new(
    params: *const DnkKeyholeParams,
    out: *mut *mut DnkKeyhole,
) -> DnkStatus {
    let Some(k) = params.as_ref() else {
        set_last_error("params is null");
        return DnkStatus::NullPointer;
    };
    guard(out, || {
        let cfg = KeyholeConfig {
            tx_antennas: k.tx_antennas,
            rx_antennas: k.rx_antennas,
            m_t: k.m_t,
            m_r: k.m_r,
            omega_t: k.omega_t,
            omega_r: k.omega_r,
            f_alpha: k.f_alpha,
            f_beta: k.f_beta,
            stbc_rate: k.stbc_rate,
            avg_snr: k.avg_snr,
        };
        cfg.validate()?;
        Ok(Box::into_raw(Box::new(DnkKeyhole(cfg))))
    })
}

/// Releases a handle from `dnk_keyhole_new`. NULL is ignored.
///
/// # Safety
/// `handle` must be NULL or an unreleased handle from `dnk_keyhole_new`.
#[no_mangle]
pub unsafe extern "C" fn dnk_keyhole_free(handle: *mut DnkKeyhole) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Output-SNR level crossing rate N_γ(γ) in crossings per second.
///
/// # Safety
/// `handle` must be a live handle, `spec` NULL or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dnk_keyhole_snr_lcr(
    handle: *const DnkKeyhole,
    gamma: f64,
    method: DnkMethod,
    spec: *const DnkQuadrature,
    out: *mut f64,
) -> DnkStatus {
    let cfg = handle!(handle);
    guard(out, || {
        cfg.snr_lcr(gamma, method.into(), &quadrature(spec)?)
    })
}

/// Average outage duration T_γ(γ) in seconds.
///
/// # Safety
/// As for `dnk_keyhole_snr_lcr`.
#[no_mangle]
pub unsafe extern "C" fn dnk_keyhole_snr_aod(
    handle: *const DnkKeyhole,
    gamma: f64,
    method: DnkMethod,
    spec: *const DnkQuadrature,
    out: *mut f64,
) -> DnkStatus {
    let cfg = handle!(handle);
    guard(out, || {
        cfg.snr_aod(gamma, method.into(), &quadrature(spec)?)
    })
}

/// Outage probability P(γ(t) < gamma).
///
/// # Safety
/// As for `dnk_keyhole_snr_lcr`.
#[no_mangle]
pub unsafe extern "C" fn dnk_keyhole_snr_cdf(
    handle: *const DnkKeyhole,
    gamma: f64,
    spec: *const DnkQuadrature,
    out: *mut f64,
) -> DnkStatus {
    let cfg = handle!(handle);
    guard(out, || cfg.snr_cdf(gamma, &quadrature(spec)?))
}

/// Normalized threshold 10 log10(γ M R / (γ̄ (Ω_T/m_T)(Ω_R/m_R))) in dB.
///
/// # Safety
/// `handle` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dnk_keyhole_normalized_threshold_db(
    handle: *const DnkKeyhole,
    gamma: f64,
    out: *mut f64,
) -> DnkStatus {
    let cfg = handle!(handle);
    guard(out, || {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Domain(format!(
                "SNR threshold must be a finite gamma > 0, got {gamma}"
            )));
        }
        Ok(cfg.normalized_threshold_db(gamma))
    })
}

/// Inverse of `dnk_keyhole_normalized_threshold_db`.
///
/// # Safety
/// `handle` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dnk_keyhole_snr_from_normalized_db(
    handle: *const DnkKeyhole,
    db: f64,
    out: *mut f64,
) -> DnkStatus {
    let cfg = handle!(handle);
    guard(out, || Ok(cfg.snr_from_normalized_db(db)))
}
