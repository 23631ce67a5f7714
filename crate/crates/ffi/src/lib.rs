// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! C ABI for the topas compiler.
//!
//! Every fallible call returns a [`TopasStatus`]; on failure a message is
//! kept per thread and read with [`topas_last_error`]. Handles are opaque and
//! owned by the caller, who releases them with the matching `*_free`.
//! Strings returned through out-parameters are released with
//! [`topas_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use topas::circuit::{emit_qasm, parse_qasm};
use topas::pipeline::{compile, CompileOutput, Mode, PipelineConfig};
use topas::{Circuit, TopasError};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopasStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// QASM syntax error or unsupported gate/statement.
    Parse = 3,
    /// Invalid configuration value or unknown topology.
    Config = 4,
    /// Circuit is wider than the device or the simulation cap.
    TooWide = 5,
    Io = 6,
    /// Any other library error.
    Failed = 7,
    /// A panic was caught at the boundary.
    Panic = 8,
}

/// A parsed circuit.
pub struct TopasCircuit(Circuit);

/// Pipeline settings.
pub struct TopasConfig(PipelineConfig);

/// Routed circuit and run report.
pub struct TopasResult(CompileOutput);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &TopasError) -> TopasStatus {
    match e {
        TopasError::Syntax { .. } | TopasError::UnsupportedGate { .. } | TopasError::UnsupportedStatement { .. } => {
            TopasStatus::Parse
        }
        TopasError::Config(_) | TopasError::UnknownTopology(_) => TopasStatus::Config,
        TopasError::CircuitTooWide { .. } | TopasError::WidthOverCap { .. } => TopasStatus::TooWide,
        TopasError::Io(_) => TopasStatus::Io,
        _ => TopasStatus::Failed,
    }
}

struct Fail(TopasStatus, String);

impl From<TopasError> for Fail {
    fn from(e: TopasError) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

/// Runs `f`, recording any error or panic.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> TopasStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TopasStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            TopasStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(TopasStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(TopasStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail(TopasStatus::NullPointer, format!("{what} is null")))
}

unsafe fn mut_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| Fail(TopasStatus::NullPointer, format!("{what} is null")))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(TopasStatus::NullPointer, "output pointer is null".into()));
    }
    out.write(value);
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    let c = CString::new(s).map_err(|_| Fail(TopasStatus::Failed, "string holds a nul byte".into()))?;
    if out.is_null() {
        return Err(Fail(TopasStatus::NullPointer, "output pointer is null".into()));
    }
    out.write(c.into_raw());
    Ok(())
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn topas_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn topas_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn topas_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses OpenQASM 2 text.
///
/// # Safety
/// `qasm` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn topas_circuit_parse_qasm(qasm: *const c_char, out: *mut *mut TopasCircuit) -> TopasStatus {
    guard(|| {
        let text = str_arg(qasm, "qasm")?;
        let c = parse_qasm(text)?;
        write_out(out, Box::into_raw(Box::new(TopasCircuit(c))))
    })
}

/// # Safety
/// `c` must come from this library and not be freed twice. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn topas_circuit_free(c: *mut TopasCircuit) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Emits the circuit as OpenQASM 2.
///
/// # Safety
/// `c` must be a live circuit handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn topas_circuit_to_qasm(c: *const TopasCircuit, out: *mut *mut c_char) -> TopasStatus {
    guard(|| {
        let c = ref_arg(c, "circuit")?;
        write_string(out, emit_qasm(&c.0))
    })
}

/// Circuit statistics.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TopasStats {
    pub width: usize,
    pub gates: usize,
    pub cnots: usize,
    pub depth: usize,
}

fn stats_of(c: &Circuit) -> TopasStats {
    TopasStats {
        width: c.width(),
        gates: c.len(),
        cnots: c.cnot_count(),
        depth: c.depth(),
    }
}

/// # Safety
/// `c` must be a live circuit handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn topas_circuit_stats(c: *const TopasCircuit, out: *mut TopasStats) -> TopasStatus {
    guard(|| {
        let c = ref_arg(c, "circuit")?;
        write_out(out, stats_of(&c.0))
    })
}

/// Default settings. Never returns NULL.
#[no_mangle]
pub extern "C" fn topas_config_new() -> *mut TopasConfig {
    Box::into_raw(Box::new(TopasConfig(PipelineConfig::default())))
}

/// # Safety
/// `cfg` must come from this library and not be freed twice. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn topas_config_free(cfg: *mut TopasConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Merges TOML keys over the current settings. On error the settings are
/// unchanged.
///
/// # Safety
/// `cfg` must be a live config handle; `toml` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn topas_config_apply_toml(cfg: *mut TopasConfig, toml: *const c_char) -> TopasStatus {
    guard(|| {
        let cfg = mut_arg(cfg, "config")?;
        let text = str_arg(toml, "toml")?;
        let next = cfg.0.overlay_toml(text)?;
        next.validate()?;
        cfg.0 = next;
        Ok(())
    })
}

/// Device spec such as `mesh:6x6`, `linear:8` or `falcon27`.
///
/// # Safety
/// `cfg` must be a live config handle; `spec` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn topas_config_set_topology(cfg: *mut TopasConfig, spec: *const c_char) -> TopasStatus {
    guard(|| {
        let cfg = mut_arg(cfg, "config")?;
        let spec = str_arg(spec, "topology")?;
        topas::topology::build_topology(spec)?;
        cfg.0.topology = spec.to_string();
        Ok(())
    })
}

/// `topas`, `post_mapping` or `map_only`.
///
/// # Safety
/// `cfg` must be a live config handle; `mode` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn topas_config_set_mode(cfg: *mut TopasConfig, mode: *const c_char) -> TopasStatus {
    guard(|| {
        let cfg = mut_arg(cfg, "config")?;
        cfg.0.mode = str_arg(mode, "mode")?.parse::<Mode>()?;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a live config handle.
#[no_mangle]
pub unsafe extern "C" fn topas_config_set_seed(cfg: *mut TopasConfig, seed: u64) -> TopasStatus {
    guard(|| {
        mut_arg(cfg, "config")?.0.seed = seed;
        Ok(())
    })
}

/// Worker threads; 0 picks the default.
///
/// # Safety
/// `cfg` must be a live config handle.
#[no_mangle]
pub unsafe extern "C" fn topas_config_set_threads(cfg: *mut TopasConfig, threads: usize) -> TopasStatus {
    guard(|| {
        mut_arg(cfg, "config")?.0.threads = threads;
        Ok(())
    })
}

/// Compiles `c` for the configured device.
///
/// # Safety
/// `c` and `cfg` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn topas_compile(
    c: *const TopasCircuit,
    cfg: *const TopasConfig,
    out: *mut *mut TopasResult,
) -> TopasStatus {
    guard(|| {
        let c = ref_arg(c, "circuit")?;
        let cfg = ref_arg(cfg, "config")?;
        cfg.0.validate()?;
        let result = compile(&c.0, &cfg.0)?;
        write_out(out, Box::into_raw(Box::new(TopasResult(result))))
    })
}

/// # Safety
/// `r` must come from this library and not be freed twice. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn topas_result_free(r: *mut TopasResult) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Routed circuit as OpenQASM 2.
///
/// # Safety
/// `r` must be a live result handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn topas_result_qasm(r: *const TopasResult, out: *mut *mut c_char) -> TopasStatus {
    guard(|| {
        let r = ref_arg(r, "result")?;
        write_string(out, emit_qasm(&r.0.mapped.circuit))
    })
}

/// Run report as JSON.
///
/// # Safety
/// `r` must be a live result handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn topas_result_report_json(r: *const TopasResult, out: *mut *mut c_char) -> TopasStatus {
    guard(|| {
        let r = ref_arg(r, "result")?;
        write_string(out, r.0.report.to_json())
    })
}

/// Statistics of the routed circuit.
///
/// # Safety
/// `r` must be a live result handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn topas_result_stats(r: *const TopasResult, out: *mut TopasStats) -> TopasStatus {
    guard(|| {
        let r = ref_arg(r, "result")?;
        write_out(out, stats_of(&r.0.mapped.circuit))
    })
}
