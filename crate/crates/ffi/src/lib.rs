//! C ABI over `nlse-core`.
//!
//! States and run configurations are opaque handles created and freed by
//! this library. Every fallible call returns an [`NlseStatus`]; the message of
//! the most recent failure on the calling thread is available from
//! [`nlse_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use nlse_core::analytics;
use nlse_core::fitting;
use nlse_core::perturbation;
use nlse_core::wavefunctions::WallModel;
use nlse_core::{Error, NonlinearityParams, QuantumState, RunConfig, ShiftResult, System};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlseStatus {
    Ok = 0,
    NullPointer = 1,
    /// Bad input: quantum numbers, regulator, length scales, config keys.
    Validation = 2,
    /// Quadrature or Monte Carlo failure.
    Numerical = 3,
    InvalidUtf8 = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlseSystem {
    Well = 0,
    Oscillator = 1,
    Hydrogen = 2,
}

/// How shifts are computed.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlseMethod {
    Quadrature = 0,
    MonteCarlo = 1,
    ClosedForm = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NlseShift {
    pub delta_e: f64,
    pub delta_e_dimensionless: f64,
    pub err_estimate: f64,
    pub err_dimensionless: f64,
    pub method: NlseMethod,
    pub evaluations: u64,
    pub warnings: u32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NlseFit {
    pub exponent: f64,
    pub exponent_err: f64,
    pub coefficient: f64,
    pub coefficient_err: f64,
    pub r_squared: f64,
    pub sign: f64,
    pub n_points: u64,
}

/// Opaque unperturbed eigenstate.
pub struct NlseState(QuantumState);

/// Opaque run configuration.
pub struct NlseConfig(RunConfig);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(e: &Error) -> NlseStatus {
    set_error(&e.to_string());
    if e.is_validation() {
        NlseStatus::Validation
    } else {
        NlseStatus::Numerical
    }
}

fn guard(f: impl FnOnce() -> NlseStatus) -> NlseStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            NlseStatus::Panic
        }
    }
}

fn null() -> NlseStatus {
    set_error("null pointer argument");
    NlseStatus::NullPointer
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, NlseStatus> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        NlseStatus::InvalidUtf8
    })
}

/// Message of the last failure on this thread; empty if none. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn nlse_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nlse_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Create a state. `l` and `m` are ignored for one-dimensional systems.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn nlse_state_new(
    system: NlseSystem,
    n: u32,
    l: u32,
    m: i32,
    a: f64,
    out: *mut *mut NlseState,
) -> NlseStatus {
    guard(|| {
        if out.is_null() {
            return null();
        }
        let system = match system {
            NlseSystem::Well => System::InfiniteWell,
            NlseSystem::Oscillator => System::Oscillator,
            NlseSystem::Hydrogen => System::Hydrogen,
        };
        match QuantumState::from_parts(system, n, l, m, a) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(NlseState(s)));
                NlseStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Evaluate shifted densities of a well state with the physical density
/// (zero outside the box) when `hard` is nonzero.
///
/// # Safety
/// `state` must be a handle from [`nlse_state_new`].
#[no_mangle]
pub unsafe extern "C" fn nlse_state_set_hard_walls(state: *mut NlseState, hard: i32) -> NlseStatus {
    guard(|| {
        let Some(s) = state.as_mut() else { return null() };
        s.0 = s.0.with_wall(if hard != 0 { WallModel::Hard } else { WallModel::Continued });
        NlseStatus::Ok
    })
}

/// # Safety
/// `state` must be null or a handle from [`nlse_state_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nlse_state_free(state: *mut NlseState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Unperturbed energy of the state.
///
/// # Safety
/// `state` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nlse_state_energy(state: *const NlseState, out: *mut f64) -> NlseStatus {
    guard(|| {
        let (Some(s), false) = (state.as_ref(), out.is_null()) else { return null() };
        *out = s.0.energy();
        NlseStatus::Ok
    })
}

/// Create a configuration with default tolerances and seed.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nlse_config_new(out: *mut *mut NlseConfig) -> NlseStatus {
    guard(|| {
        if out.is_null() {
            return null();
        }
        *out = Box::into_raw(Box::new(NlseConfig(RunConfig::default())));
        NlseStatus::Ok
    })
}

/// Set a configuration key such as `rel_tol`, `mc_samples` or `rng_seed`.
///
/// # Safety
/// `config` must be a live handle; `key` and `value` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn nlse_config_set(
    config: *mut NlseConfig,
    key: *const c_char,
    value: *const c_char,
) -> NlseStatus {
    guard(|| {
        let Some(cfg) = config.as_mut() else { return null() };
        let (key, value) = match (text(key), text(value)) {
            (Ok(k), Ok(v)) => (k, v),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        let mut next = cfg.0;
        match next.set(key, value).map_err(Error::Config).and_then(|_| next.validate()) {
            Ok(()) => {
                cfg.0 = next;
                NlseStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// # Safety
/// `config` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nlse_config_free(config: *mut NlseConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

fn shift_out(r: &ShiftResult) -> NlseShift {
    NlseShift {
        delta_e: r.delta_e,
        delta_e_dimensionless: r.delta_e_dimensionless,
        err_estimate: r.err_estimate,
        err_dimensionless: r.err_dimensionless,
        method: match r.method {
            nlse_core::Method::Quadrature => NlseMethod::Quadrature,
            nlse_core::Method::MonteCarlo => NlseMethod::MonteCarlo,
            nlse_core::Method::ClosedForm => NlseMethod::ClosedForm,
        },
        evaluations: r.evaluations as u64,
        warnings: r.warnings.len() as u32,
    }
}

unsafe fn with_state_config(
    state: *const NlseState,
    config: *const NlseConfig,
    out: *mut NlseShift,
    f: impl FnOnce(&QuantumState, &RunConfig) -> nlse_core::Result<ShiftResult>,
) -> NlseStatus {
    guard(|| {
        let (Some(s), false) = (state.as_ref(), out.is_null()) else { return null() };
        let default = RunConfig::default();
        let cfg = config.as_ref().map_or(&default, |c| &c.0);
        match f(&s.0, cfg) {
            Ok(r) => {
                *out = shift_out(&r);
                NlseStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// First-order shift of the regularized nonlinearity with scale `length` and
/// regulator `eta`. A null `config` uses the defaults.
///
/// # Safety
/// `state` must be a live handle, `config` null or live, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nlse_delta_e(
    state: *const NlseState,
    length: f64,
    eta: f64,
    config: *const NlseConfig,
    out: *mut NlseShift,
) -> NlseStatus {
    with_state_config(state, config, out, |s, cfg| {
        let params =
            if s.is_1d() { NonlinearityParams::new(length, eta) } else { NonlinearityParams::three_d(length, eta) };
        perturbation::delta_e(s, &params, cfg)
    })
}

/// Gross-Pitaevskii shift `g int p^2`.
///
/// # Safety
/// As for [`nlse_delta_e`].
#[no_mangle]
pub unsafe extern "C" fn nlse_delta_e_gp(
    state: *const NlseState,
    g: f64,
    config: *const NlseConfig,
    out: *mut NlseShift,
) -> NlseStatus {
    with_state_config(state, config, out, |s, cfg| perturbation::delta_e_gp(s, g, cfg))
}

/// Shift of the rescaled kinetic term, `eps <T>`.
///
/// # Safety
/// As for [`nlse_delta_e`].
#[no_mangle]
pub unsafe extern "C" fn nlse_delta_e_pseudo(
    state: *const NlseState,
    eps: f64,
    config: *const NlseConfig,
    out: *mut NlseShift,
) -> NlseStatus {
    with_state_config(state, config, out, |s, cfg| perturbation::delta_e_pseudo(s, eps, cfg))
}

/// Regulator value where the shift changes sign.
///
/// # Safety
/// `state` live, `config` null or live, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nlse_critical_eta(
    state: *const NlseState,
    length: f64,
    config: *const NlseConfig,
    out: *mut f64,
) -> NlseStatus {
    guard(|| {
        let (Some(s), false) = (state.as_ref(), out.is_null()) else { return null() };
        let default = RunConfig::default();
        let cfg = config.as_ref().map_or(&default, |c| &c.0);
        match perturbation::critical_eta(&s.0, length, cfg) {
            Ok(c) => {
                *out = c.eta;
                NlseStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Large-`alpha` node integral `J(eta)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nlse_j_closed(eta: f64, out: *mut f64) -> NlseStatus {
    guard(|| {
        if out.is_null() {
            return null();
        }
        match analytics::j_closed(eta) {
            Ok(v) => {
                *out = v;
                NlseStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Node-dominated prediction of the dimensionless shift of a 1D state.
///
/// # Safety
/// `state` live, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nlse_node_prediction(
    state: *const NlseState,
    length: f64,
    eta: f64,
    out: *mut f64,
) -> NlseStatus {
    guard(|| {
        let (Some(s), false) = (state.as_ref(), out.is_null()) else { return null() };
        match analytics::node_shift_prediction(&s.0, &NonlinearityParams::new(length, eta)) {
            Ok(p) => {
                *out = p.predicted_dimensionless;
                NlseStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Power-law fit of `|y| = c x^k` over `len` points.
///
/// # Safety
/// `x` and `y` must point to `len` readable doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nlse_power_law_fit(x: *const f64, y: *const f64, len: usize, out: *mut NlseFit) -> NlseStatus {
    guard(|| {
        if x.is_null() || y.is_null() || out.is_null() {
            return null();
        }
        let xs = std::slice::from_raw_parts(x, len);
        let ys = std::slice::from_raw_parts(y, len);
        let pts: Vec<(f64, f64)> = xs.iter().copied().zip(ys.iter().copied()).collect();
        match fitting::power_law_fit(&pts) {
            Ok(f) => {
                *out = NlseFit {
                    exponent: f.exponent,
                    exponent_err: f.exponent_err,
                    coefficient: f.coefficient,
                    coefficient_err: f.coefficient_err,
                    r_squared: f.r_squared,
                    sign: f.sign,
                    n_points: f.n_points as u64,
                };
                NlseStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}
