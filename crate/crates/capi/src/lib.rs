//! C ABI for the waveguide PINN solver.
//!
//! The API follows the usual opaque-handle pattern: load a checkpoint into
//! a [`WgpinnModel`], evaluate it pointwise, free it. All functions return
//! a [`WgpinnStatus`] code; out-parameters are written only on
//! `WGPINN_OK`. The generated header lives in `include/wgpinn.h`.

use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use wgpinn::checkpoint::{load_checkpoint, ProblemMeta};
use wgpinn::checks::run_verification;
use wgpinn::experiment::{run_single, ExperimentConfig};
use wgpinn::network::NetworkParams;
use wgpinn::physics::ProblemSpec;
use wgpinn::train::evaluate_field;
use wgpinn::Error;

/// Status codes returned by every API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WgpinnStatus {
    WgpinnOk = 0,
    WgpinnNullArgument = 1,
    WgpinnInvalidUtf8 = 2,
    WgpinnIoError = 3,
    WgpinnParseError = 4,
    WgpinnContractViolation = 5,
    WgpinnNumericFailure = 6,
    /// The checkpoint has no problem block, so the reconstructed field is
    /// undefined (raw network evaluation still works).
    WgpinnMissingProblem = 7,
    WgpinnVerificationFailed = 8,
    WgpinnInternalError = 9,
}

use WgpinnStatus::*;

fn status_of(e: &Error) -> WgpinnStatus {
    match e {
        Error::Contract(_) => WgpinnContractViolation,
        Error::Numeric(_) => WgpinnNumericFailure,
        Error::Config(_) => WgpinnParseError,
        Error::Io(_) => WgpinnIoError,
    }
}

/// Opaque trained-model handle.
pub struct WgpinnModel {
    params: NetworkParams,
    problem: Option<(ProblemMeta, ProblemSpec)>,
}

fn guarded(f: impl FnOnce() -> WgpinnStatus) -> WgpinnStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => WgpinnInternalError,
    }
}

unsafe fn path_arg<'a>(ptr: *const c_char) -> Result<&'a Path, WgpinnStatus> {
    if ptr.is_null() {
        return Err(WgpinnNullArgument);
    }
    let s = unsafe { CStr::from_ptr(ptr) }
        .to_str()
        .map_err(|_| WgpinnInvalidUtf8)?;
    Ok(Path::new(s))
}

/// Loads a checkpoint file into a model handle.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer. On
/// success `*out` owns the model and must be released with
/// [`wgpinn_model_free`].
#[no_mangle]
pub unsafe extern "C" fn wgpinn_model_load(
    path: *const c_char,
    out: *mut *mut WgpinnModel,
) -> WgpinnStatus {
    guarded(|| {
        if out.is_null() {
            return WgpinnNullArgument;
        }
        let path = match unsafe { path_arg(path) } {
            Ok(p) => p,
            Err(s) => return s,
        };
        match load_checkpoint(path) {
            Ok((params, meta)) => {
                let problem = match meta.map(|m| m.to_spec().map(|s| (m, s))).transpose() {
                    Ok(p) => p,
                    Err(e) => return status_of(&e),
                };
                let model = Box::new(WgpinnModel { params, problem });
                unsafe { *out = Box::into_raw(model) };
                WgpinnOk
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Releases a model handle. NULL is a no-op.
///
/// # Safety
/// `model` must have been produced by [`wgpinn_model_load`] and not freed
/// before.
#[no_mangle]
pub unsafe extern "C" fn wgpinn_model_free(model: *mut WgpinnModel) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Raw network output at `(x, z)`.
///
/// # Safety
/// All pointers must be valid; `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn wgpinn_model_eval(
    model: *const WgpinnModel,
    x: f64,
    z: f64,
    re: *mut f64,
    im: *mut f64,
) -> WgpinnStatus {
    guarded(|| {
        if model.is_null() || re.is_null() || im.is_null() {
            return WgpinnNullArgument;
        }
        let model = unsafe { &*model };
        match model.params.forward(x, z) {
            Ok((vr, vi)) => {
                unsafe {
                    *re = vr;
                    *im = vi;
                }
                WgpinnOk
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Reconstructed solution at `(x, z)`; for a taper-formulation model the
/// tapered incoming wave is added back. Requires the checkpoint's problem
/// block.
///
/// # Safety
/// All pointers must be valid; `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn wgpinn_model_eval_field(
    model: *const WgpinnModel,
    x: f64,
    z: f64,
    re: *mut f64,
    im: *mut f64,
) -> WgpinnStatus {
    guarded(|| {
        if model.is_null() || re.is_null() || im.is_null() {
            return WgpinnNullArgument;
        }
        let model = unsafe { &*model };
        let Some((_, spec)) = &model.problem else {
            return WgpinnMissingProblem;
        };
        match evaluate_field(&model.params, spec, &[(x, z)]) {
            Ok(field) => {
                unsafe {
                    *re = field[0].re;
                    *im = field[0].im;
                }
                WgpinnOk
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Wave number stored in the model's problem block, or NaN when absent.
///
/// # Safety
/// `model` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn wgpinn_model_wave_number(model: *const WgpinnModel) -> f64 {
    if model.is_null() {
        return f64::NAN;
    }
    let model = unsafe { &*model };
    model.problem.as_ref().map_or(f64::NAN, |(m, _)| m.k)
}

/// Runs one training configuration end to end; artifacts land in the
/// config's output directory.
///
/// # Safety
/// `config_path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn wgpinn_run_config(config_path: *const c_char) -> WgpinnStatus {
    guarded(|| {
        let path = match unsafe { path_arg(config_path) } {
            Ok(p) => p,
            Err(s) => return s,
        };
        let cfg = match ExperimentConfig::load(path) {
            Ok(c) => c,
            Err(e) => return status_of(&e),
        };
        match run_single(&cfg) {
            Ok(_) => WgpinnOk,
            Err(e) => status_of(&e),
        }
    })
}

/// Runs the built-in verification suite for wave number `k` on the
/// half-length-`b` junction.
#[no_mangle]
pub extern "C" fn wgpinn_verify(k: f64, b: f64) -> WgpinnStatus {
    guarded(|| {
        if run_verification(k, b).all_passed() {
            WgpinnOk
        } else {
            WgpinnVerificationFailed
        }
    })
}

/// Static name of a status code (never NULL; does not allocate).
#[no_mangle]
pub extern "C" fn wgpinn_status_name(status: WgpinnStatus) -> *const c_char {
    let names: [&CStr; 10] = [
        c"ok",
        c"null argument",
        c"invalid utf-8",
        c"io error",
        c"parse error",
        c"contract violation",
        c"numeric failure",
        c"missing problem block",
        c"verification failed",
        c"internal error",
    ];
    names[status as usize].as_ptr()
}
