//! C ABI over the lss-loewner library.
//!
//! Conventions: handles are opaque pointers owned by the library and released
//! with the matching `_free` function; strings returned as `char*` are owned
//! by the caller and released with [`lss_string_free`]; constructor-style
//! functions return NULL on failure and record a message retrievable through
//! [`lss_last_error_message`] (thread-local, valid until the next failure on
//! the same thread).

use std::cell::RefCell;
use std::ffi::{CStr, CString, c_char};

use lss_loewner::error::Error;
use lss_loewner::formats;
use lss_loewner::lss::{C64, LssModel, SwitchingSignal};
use lss_loewner::reduction::{self, RankSpec};
use lss_loewner::sim::{self, InputSignal};
use lss_loewner::transfer::eval_transfer;
use lss_loewner::tuples::Word;

/// Status codes returned by fallible operations.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LssStatus {
    Ok = 0,
    /// A pointer argument was null or an index was out of range.
    InvalidArgument = 1,
    /// Input text failed to parse or violated the model contract.
    ParseError = 2,
    /// A numerical precondition failed (singular pencil, unstable mode, ...).
    NumericalError = 3,
}

/// Opaque switched-system model.
pub struct LssModelHandle {
    inner: LssModel,
}

/// Opaque simulation result.
pub struct LssTrajectoryHandle {
    t: Vec<f64>,
    y: Vec<f64>,
    modes: Vec<u32>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> LssStatus {
    match err {
        Error::InvalidInput(_) | Error::InvalidSignal { .. } | Error::CountMismatch { .. } => {
            LssStatus::ParseError
        }
        _ => LssStatus::NumericalError,
    }
}

/// Message for the most recent failure on this thread. Never null; empty when
/// no failure happened yet. Valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn lss_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn lss_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

unsafe fn str_arg<'a>(ptr: *const c_char) -> Result<&'a str, LssStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(LssStatus::InvalidArgument);
    }
    unsafe { CStr::from_ptr(ptr) }.to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        LssStatus::InvalidArgument
    })
}

/// Parses a model from the JSON contract. NULL on failure.
///
/// # Safety
/// `json` must point to a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn lss_model_from_json(json: *const c_char) -> *mut LssModelHandle {
    let text = match unsafe { str_arg(json) } {
        Ok(t) => t,
        Err(_) => return std::ptr::null_mut(),
    };
    match formats::model_from_json(text) {
        Ok(inner) => Box::into_raw(Box::new(LssModelHandle { inner })),
        Err(e) => {
            set_error(&e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// Serializes the model back to JSON; free with [`lss_string_free`].
///
/// # Safety
/// `model` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn lss_model_to_json(model: *const LssModelHandle) -> *mut c_char {
    if model.is_null() {
        set_error("null model handle");
        return std::ptr::null_mut();
    }
    let text = formats::model_to_json(&unsafe { &*model }.inner);
    CString::new(text).map(CString::into_raw).unwrap_or(std::ptr::null_mut())
}

/// # Safety
/// `model` must be a live handle from this library; it is consumed.
#[no_mangle]
pub unsafe extern "C" fn lss_model_free(model: *mut LssModelHandle) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Number of modes; 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lss_model_num_modes(model: *const LssModelHandle) -> u32 {
    if model.is_null() {
        return 0;
    }
    unsafe { &*model }.inner.num_modes() as u32
}

/// State dimension of 1-based `mode`; 0 when out of range.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lss_model_dim(model: *const LssModelHandle, mode: u32) -> u32 {
    if model.is_null() {
        return 0;
    }
    let m = &unsafe { &*model }.inner;
    if mode == 0 || mode as usize > m.num_modes() {
        return 0;
    }
    m.dim(mode as usize) as u32
}

/// Count of structural-invariant violations; when nonzero, the joined
/// descriptions are available through [`lss_last_error_message`].
///
/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn lss_model_validate(model: *const LssModelHandle) -> u32 {
    if model.is_null() {
        set_error("null model handle");
        return u32::MAX;
    }
    let violations = unsafe { &*model }.inner.validate();
    if !violations.is_empty() {
        let joined: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        set_error(&joined.join("; "));
    }
    violations.len() as u32
}

/// Evaluates a generalized transfer-function value for the word given by
/// 1-based `modes[0..len]` and points `re/im[0..len]`.
///
/// # Safety
/// All pointers must reference `len` valid elements; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn lss_eval_transfer(
    model: *const LssModelHandle,
    modes: *const u32,
    len: usize,
    re: *const f64,
    im: *const f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> LssStatus {
    if model.is_null() || modes.is_null() || re.is_null() || im.is_null() || out_re.is_null() || out_im.is_null() || len == 0 {
        set_error("null argument or empty word");
        return LssStatus::InvalidArgument;
    }
    let m = &unsafe { &*model }.inner;
    let modes: Vec<usize> = unsafe { std::slice::from_raw_parts(modes, len) }
        .iter()
        .map(|&q| q as usize)
        .collect();
    let re = unsafe { std::slice::from_raw_parts(re, len) };
    let im = unsafe { std::slice::from_raw_parts(im, len) };
    let points: Vec<C64> = re.iter().zip(im).map(|(&r, &i)| C64::new(r, i)).collect();
    match eval_transfer(m, &Word::new(modes, points)) {
        Ok(v) => {
            unsafe {
                *out_re = v.re;
                *out_im = v.im;
            }
            LssStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            status_of(&e)
        }
    }
}

/// Frequency response of one mode at `s = i omega` over `omega[0..n]`.
///
/// # Safety
/// All pointers must reference `n` valid (writable, for outputs) elements.
#[no_mangle]
pub unsafe extern "C" fn lss_freq_response(
    model: *const LssModelHandle,
    mode: u32,
    omega: *const f64,
    n: usize,
    out_re: *mut f64,
    out_im: *mut f64,
) -> LssStatus {
    if model.is_null() || omega.is_null() || out_re.is_null() || out_im.is_null() {
        set_error("null argument");
        return LssStatus::InvalidArgument;
    }
    let m = &unsafe { &*model }.inner;
    if mode == 0 || mode as usize > m.num_modes() {
        set_error("mode out of range");
        return LssStatus::InvalidArgument;
    }
    let omega = unsafe { std::slice::from_raw_parts(omega, n) };
    match sim::freq_response_mode(m, mode as usize, omega) {
        Ok(values) => {
            for (i, v) in values.iter().enumerate() {
                unsafe {
                    *out_re.add(i) = v.re;
                    *out_im.add(i) = v.im;
                }
            }
            LssStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            status_of(&e)
        }
    }
}

/// Loewner reduction driven by a tuple-spec JSON (same schema as the CLI).
/// `tol` is the relative truncation tolerance; pass `exact != 0` for the
/// square realization and `realify != 0` to apply the conjugate-pair
/// transform first. NULL on failure.
///
/// # Safety
/// `model` must be a live handle and `tuples_json` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn lss_loewner_reduce(
    model: *const LssModelHandle,
    tuples_json: *const c_char,
    tol: f64,
    exact: i32,
    realify: i32,
) -> *mut LssModelHandle {
    if model.is_null() {
        set_error("null model handle");
        return std::ptr::null_mut();
    }
    let text = match unsafe { str_arg(tuples_json) } {
        Ok(t) => t,
        Err(_) => return std::ptr::null_mut(),
    };
    let m = &unsafe { &*model }.inner;
    let result = (|| -> Result<LssModel, Error> {
        let spec = formats::tuple_spec_from_json(text)?;
        let (gamma, theta) = formats::build_tuples(&spec)?;
        let mut data = lss_loewner::loewner::from_state(m, &gamma, &theta)?;
        if realify != 0 {
            data = reduction::realify(&data)?;
        }
        if exact != 0 {
            reduction::exact_realization(&data)
        } else {
            Ok(reduction::svd_truncate(&data, RankSpec::Tolerance(tol))?.0)
        }
    })();
    match result {
        Ok(inner) => Box::into_raw(Box::new(LssModelHandle { inner })),
        Err(e) => {
            set_error(&e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// Balanced truncation at the given order. NULL on failure.
///
/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn lss_bt_reduce(model: *const LssModelHandle, order: u32) -> *mut LssModelHandle {
    if model.is_null() {
        set_error("null model handle");
        return std::ptr::null_mut();
    }
    match lss_loewner::bt::bt_reduce(&unsafe { &*model }.inner, order as usize) {
        Ok((inner, _report)) => Box::into_raw(Box::new(LssModelHandle { inner })),
        Err(e) => {
            set_error(&e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// Integrates the switched system from zero state. `modes`/`durations` hold
/// `n_events` dwell intervals; `input_spec` follows the CLI grammar (`zero`,
/// `step:A`, `sin:A,F`). NULL on failure.
///
/// # Safety
/// Array arguments must reference `n_events` valid elements; `input_spec`
/// must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn lss_simulate(
    model: *const LssModelHandle,
    modes: *const u32,
    durations: *const f64,
    n_events: usize,
    input_spec: *const c_char,
    max_step: f64,
) -> *mut LssTrajectoryHandle {
    if model.is_null() || modes.is_null() || durations.is_null() || n_events == 0 {
        set_error("null argument or empty signal");
        return std::ptr::null_mut();
    }
    let spec = match unsafe { str_arg(input_spec) } {
        Ok(t) => t,
        Err(_) => return std::ptr::null_mut(),
    };
    let m = &unsafe { &*model }.inner;
    let modes = unsafe { std::slice::from_raw_parts(modes, n_events) };
    let durations = unsafe { std::slice::from_raw_parts(durations, n_events) };
    let result = (|| -> Result<LssTrajectoryHandle, Error> {
        let events: Vec<(usize, f64)> =
            modes.iter().zip(durations).map(|(&q, &d)| (q as usize, d)).collect();
        let signal = SwitchingSignal::new(events)?;
        let input = InputSignal::parse(spec)?;
        let traj = sim::simulate(m, &signal, &|t| input.eval(t), max_step)?;
        Ok(LssTrajectoryHandle {
            y: traj.y0(),
            modes: traj.mode.iter().map(|&q| q as u32).collect(),
            t: traj.t,
        })
    })();
    match result {
        Ok(handle) => Box::into_raw(Box::new(handle)),
        Err(e) => {
            set_error(&e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// Number of samples in a trajectory.
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lss_trajectory_len(traj: *const LssTrajectoryHandle) -> usize {
    if traj.is_null() { 0 } else { unsafe { &*traj }.t.len() }
}

/// Borrowed pointer to the time grid; valid while the handle lives.
///
/// # Safety
/// `traj` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn lss_trajectory_times(traj: *const LssTrajectoryHandle) -> *const f64 {
    if traj.is_null() { std::ptr::null() } else { unsafe { &*traj }.t.as_ptr() }
}

/// Borrowed pointer to the first output channel; valid while the handle lives.
///
/// # Safety
/// `traj` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn lss_trajectory_outputs(traj: *const LssTrajectoryHandle) -> *const f64 {
    if traj.is_null() { std::ptr::null() } else { unsafe { &*traj }.y.as_ptr() }
}

/// Borrowed pointer to the active-mode annotation; valid while the handle lives.
///
/// # Safety
/// `traj` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn lss_trajectory_modes(traj: *const LssTrajectoryHandle) -> *const u32 {
    if traj.is_null() { std::ptr::null() } else { unsafe { &*traj }.modes.as_ptr() }
}

/// # Safety
/// `traj` must be a live handle from this library; it is consumed.
#[no_mangle]
pub unsafe extern "C" fn lss_trajectory_free(traj: *mut LssTrajectoryHandle) {
    if !traj.is_null() {
        drop(unsafe { Box::from_raw(traj) });
    }
}
