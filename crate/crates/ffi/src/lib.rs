//! C ABI for the specmzi toolkit.
//!
//! Bindings follow the usual opaque-handle pattern: create a config handle,
//! adjust it with `specmzi_config_set`, run commands against an output
//! directory, free the handle. Every entry point returns a status code;
//! `specmzi_last_error` retrieves a message for the most recent failure on
//! the calling thread.
//!
//! The matching C header lives at `include/specmzi.h` and is kept in sync
//! with this file by hand (`cbindgen.toml` is provided for regeneration
//! where cbindgen is available).

use std::cell::RefCell;
use std::ffi::{c_char, c_double, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use specmzi::config::RunConfig;
use specmzi::interference::egy_check;
use specmzi::{cli, Error};

/// Status codes returned by every FFI entry point.
pub const SPECMZI_OK: c_int = 0;
/// Physics or degeneracy failure (for example, no mode structure).
pub const SPECMZI_ERR_PHYSICS: c_int = 1;
/// Input, parse, or I/O failure.
pub const SPECMZI_ERR_INPUT: c_int = 2;
/// A required pointer was null or not valid UTF-8.
pub const SPECMZI_ERR_ARGUMENT: c_int = 3;
/// An internal panic was caught at the boundary.
pub const SPECMZI_ERR_INTERNAL: c_int = 4;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let owned = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = owned);
}

fn code_of(e: &Error) -> c_int {
    match e.exit_code() {
        2 => SPECMZI_ERR_INPUT,
        _ => SPECMZI_ERR_PHYSICS,
    }
}

fn report(result: specmzi::Result<()>) -> c_int {
    match result {
        Ok(()) => SPECMZI_OK,
        Err(e) => {
            let code = code_of(&e);
            set_last_error(&e.to_string());
            code
        }
    }
}

fn guarded(f: impl FnOnce() -> c_int) -> c_int {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(code) => code,
        Err(_) => {
            set_last_error("internal panic");
            SPECMZI_ERR_INTERNAL
        }
    }
}

/// # Safety
/// `ptr` must be null or a NUL-terminated string valid for the call.
unsafe fn utf8<'a>(ptr: *const c_char) -> Result<&'a str, c_int> {
    if ptr.is_null() {
        set_last_error("null pointer argument");
        return Err(SPECMZI_ERR_ARGUMENT);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_last_error("argument is not valid UTF-8");
        SPECMZI_ERR_ARGUMENT
    })
}

/// Opaque run-configuration handle.
pub struct SpecmziConfig(RunConfig);

/// Allocate a handle holding the default configuration. Never fails; free
/// with [`specmzi_config_free`].
#[no_mangle]
pub extern "C" fn specmzi_config_new() -> *mut SpecmziConfig {
    Box::into_raw(Box::new(SpecmziConfig(RunConfig::default())))
}

/// Load a key=value configuration file into a new handle. Returns null on
/// failure (see [`specmzi_last_error`]).
///
/// # Safety
/// `path` must be a NUL-terminated string valid for the call.
#[no_mangle]
pub unsafe extern "C" fn specmzi_config_load(path: *const c_char) -> *mut SpecmziConfig {
    let Ok(path) = utf8(path) else {
        return std::ptr::null_mut();
    };
    match RunConfig::load(Path::new(path)) {
        Ok(config) => Box::into_raw(Box::new(SpecmziConfig(config))),
        Err(e) => {
            set_last_error(&e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// Apply one `key` / `value` assignment to the handle, with the same keys
/// as the configuration file.
///
/// # Safety
/// `config` must be a live handle from this library; `key` and `value` must
/// be NUL-terminated strings valid for the call.
#[no_mangle]
pub unsafe extern "C" fn specmzi_config_set(
    config: *mut SpecmziConfig,
    key: *const c_char,
    value: *const c_char,
) -> c_int {
    guarded(|| {
        if config.is_null() {
            set_last_error("null config handle");
            return SPECMZI_ERR_ARGUMENT;
        }
        let (key, value) = match (utf8(key), utf8(value)) {
            (Ok(k), Ok(v)) => (k, v),
            (Err(c), _) | (_, Err(c)) => return c,
        };
        report((*config).0.set(key, value))
    })
}

/// Free a handle. Null is ignored.
///
/// # Safety
/// `config` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn specmzi_config_free(config: *mut SpecmziConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

unsafe fn run_command(
    config: *const SpecmziConfig,
    out_dir: *const c_char,
    f: impl FnOnce(&RunConfig, &Path) -> specmzi::Result<()>,
) -> c_int {
    if config.is_null() {
        set_last_error("null config handle");
        return SPECMZI_ERR_ARGUMENT;
    }
    let out = match utf8(out_dir) {
        Ok(s) => s,
        Err(c) => return c,
    };
    report(f(&(*config).0, Path::new(out)))
}

/// Run the per-wavelength scan into `out_dir`.
///
/// # Safety
/// `config` must be a live handle; `out_dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn specmzi_run_scan(
    config: *const SpecmziConfig,
    out_dir: *const c_char,
) -> c_int {
    guarded(|| run_command(config, out_dir, cli::cmd_scan))
}

/// Emit the extrema and duality tables into `out_dir`.
///
/// # Safety
/// As for [`specmzi_run_scan`].
#[no_mangle]
pub unsafe extern "C" fn specmzi_run_table(
    config: *const SpecmziConfig,
    out_dir: *const c_char,
) -> c_int {
    guarded(|| run_command(config, out_dir, cli::cmd_table))
}

/// Run the binned-power sweep into `out_dir`.
///
/// # Safety
/// As for [`specmzi_run_scan`].
#[no_mangle]
pub unsafe extern "C" fn specmzi_run_bins(
    config: *const SpecmziConfig,
    out_dir: *const c_char,
) -> c_int {
    guarded(|| run_command(config, out_dir, cli::cmd_bins))
}

/// Run the time-domain quad-cell simulation into `out_dir`.
///
/// # Safety
/// As for [`specmzi_run_scan`].
#[no_mangle]
pub unsafe extern "C" fn specmzi_run_danan(
    config: *const SpecmziConfig,
    out_dir: *const c_char,
) -> c_int {
    guarded(|| run_command(config, out_dir, cli::cmd_danan))
}

/// Analyze two measured two-column arm spectra into `out_dir`.
///
/// # Safety
/// `config` must be a live handle; the three paths NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn specmzi_run_ingest(
    config: *const SpecmziConfig,
    arm1_path: *const c_char,
    arm2_path: *const c_char,
    out_dir: *const c_char,
) -> c_int {
    guarded(|| {
        if config.is_null() {
            set_last_error("null config handle");
            return SPECMZI_ERR_ARGUMENT;
        }
        let (arm1, arm2, out) = match (utf8(arm1_path), utf8(arm2_path), utf8(out_dir)) {
            (Ok(a), Ok(b), Ok(o)) => (a, b, o),
            (Err(c), ..) | (_, Err(c), _) | (.., Err(c)) => return c,
        };
        report(cli::cmd_ingest(
            Path::new(arm1),
            Path::new(arm2),
            &(*config).0,
            Path::new(out),
        ))
    })
}

/// Fringe visibility `(i_max - i_min) / (i_max + i_min)`; requires
/// `i_max >= i_min >= 0` and positive total power.
///
/// # Safety
/// `out` must point to a writable double.
#[no_mangle]
pub unsafe extern "C" fn specmzi_visibility(
    i_max: c_double,
    i_min: c_double,
    out: *mut c_double,
) -> c_int {
    guarded(|| {
        if out.is_null() {
            set_last_error("null output pointer");
            return SPECMZI_ERR_ARGUMENT;
        }
        if !(i_min >= 0.0 && i_max >= i_min) || i_max + i_min <= 0.0 {
            set_last_error("visibility needs i_max >= i_min >= 0 with positive total power");
            return SPECMZI_ERR_PHYSICS;
        }
        *out = (i_max - i_min) / (i_max + i_min);
        SPECMZI_OK
    })
}

/// Duality sum of squares `v^2 + d^2`; `passes` (when non-null) receives 1
/// if the duality bound holds within tolerance.
///
/// # Safety
/// `out` must point to a writable double; `passes` must be null or point to
/// a writable int.
#[no_mangle]
pub unsafe extern "C" fn specmzi_egy_check(
    v: c_double,
    d: c_double,
    out: *mut c_double,
    passes: *mut c_int,
) -> c_int {
    guarded(|| {
        if out.is_null() {
            set_last_error("null output pointer");
            return SPECMZI_ERR_ARGUMENT;
        }
        if !(0.0..=1.0).contains(&v) || !(0.0..=1.0).contains(&d) {
            set_last_error("v and d must lie in [0, 1]");
            return SPECMZI_ERR_PHYSICS;
        }
        let record = egy_check(v, d);
        *out = record.sum_of_squares;
        if !passes.is_null() {
            *passes = record.passes as c_int;
        }
        SPECMZI_OK
    })
}

/// Copy the last error message on this thread into `buffer` (always
/// NUL-terminated when `len > 0`). Returns the full message length.
///
/// # Safety
/// `buffer` must be null or valid for `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn specmzi_last_error(buffer: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let message = slot.borrow();
        let bytes = message.as_bytes_with_nul();
        if !buffer.is_null() && len > 0 {
            let n = bytes.len().min(len);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buffer, n);
            *buffer.add(n - 1) = 0;
        }
        bytes.len() - 1
    })
}
