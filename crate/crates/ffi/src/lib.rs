//! C ABI for the fluxmap technology mapper.
//!
//! Libraries, netlists and mapping results are opaque heap handles released
//! with their `*_free` function. Every entry point returns an [`FmStatus`];
//! on failure, [`fm_last_error_message`] describes the error on the calling
//! thread. Strings handed to the caller are released with [`fm_string_free`].
//! Panics never cross the boundary: they are reported as
//! [`FmStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fluxmap::genlib::{parse_genlib, BuiltinParams, CellLibrary};
use fluxmap::mapped::write_mapped_blif;
use fluxmap::netlist::{parse_blif, RawNetlist};
use fluxmap::peephole::PeepholeConfig;
use fluxmap::pipeline::{map_netlist, verify_mapping, MapConfig, MapOutcome};
use fluxmap::report::{write_run_report, MapStats};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    MapError = 4,
    VerifyError = 5,
    Panic = 6,
}

/// Parsed cell library.
pub struct FmLibrary(CellLibrary);

/// Parsed combinational netlist.
pub struct FmNetlist(RawNetlist);

/// A finished mapping with its BLIF text and report.
pub struct FmResult {
    outcome: MapOutcome,
    blif: String,
    report: String,
}

/// Characteristics of the built-in DFF and splitter cells.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FmBuiltinParams {
    pub dff_delay: f64,
    pub dff_area: f64,
    pub splitter_delay: f64,
    pub splitter_area: f64,
}

/// Mapping options; start from [`fm_map_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FmMapOptions {
    /// PSD tuning iterations.
    pub iterations: u32,
    /// Cut size in 2..=6; 0 picks min(6, widest library gate).
    pub cut_size: u32,
    /// Depth-optimal mapping with area tie-break that ignores balancing.
    pub baseline: bool,
    /// Also align all primary outputs to the same level.
    pub balance_outputs: bool,
    /// Check balance, splitter legality and equivalence before returning.
    pub verify: bool,
}

/// Statistics of one mapped network.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FmStats {
    pub gate_count: u64,
    pub dff_count: u64,
    pub splitter_count: u64,
    pub logical_depth: u32,
    pub iterations: u32,
    pub worst_stage_delay: f64,
    pub psd: f64,
    pub runtime_s: f64,
}

impl From<MapStats> for FmStats {
    fn from(s: MapStats) -> Self {
        FmStats {
            gate_count: s.gate_count as u64,
            dff_count: s.dff_count as u64,
            splitter_count: s.splitter_count as u64,
            logical_depth: s.logical_depth,
            iterations: s.iterations as u32,
            worst_stage_delay: s.worst_stage_delay,
            psd: s.psd,
            runtime_s: s.runtime_s,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

type Failure = (FmStatus, String);

/// Run `f`, recording its error message and converting panics.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FmStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FmStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal error: {msg}"));
            FmStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    (FmStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| (FmStatus::InvalidUtf8, format!("`{what}` is not UTF-8: {e}")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

fn to_c(s: &str) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| (FmStatus::MapError, "text contains a nul byte".into()))
}

/// Default characteristics: every delay and area equals 1.
#[no_mangle]
pub extern "C" fn fm_builtin_params_default() -> FmBuiltinParams {
    let p = BuiltinParams::default();
    FmBuiltinParams {
        dff_delay: p.dff_delay,
        dff_area: p.dff_area,
        splitter_delay: p.splitter_delay,
        splitter_area: p.splitter_area,
    }
}

/// Defaults of the command-line tool: 5 iterations, automatic cut size,
/// SFQ mode, no output alignment, no verification.
#[no_mangle]
pub extern "C" fn fm_map_options_default() -> FmMapOptions {
    FmMapOptions {
        iterations: PeepholeConfig::default().iterations as u32,
        cut_size: 0,
        baseline: false,
        balance_outputs: false,
        verify: false,
    }
}

/// Parse a genlib cell library. `params` may be null for the defaults. On
/// success `*out` owns a new handle.
///
/// # Safety
/// `genlib` must be a nul-terminated string, `params` null or valid, and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fm_library_from_genlib(
    genlib: *const c_char,
    params: *const FmBuiltinParams,
    out: *mut *mut FmLibrary,
) -> FmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let text = text(genlib, "genlib")?;
        let p = params.as_ref().copied().unwrap_or_else(|| fm_builtin_params_default());
        let params = BuiltinParams {
            dff_delay: p.dff_delay,
            dff_area: p.dff_area,
            splitter_delay: p.splitter_delay,
            splitter_area: p.splitter_area,
        };
        let lib = parse_genlib(text, params).map_err(|e| (FmStatus::ParseError, format!("genlib: {e}")))?;
        *out = Box::into_raw(Box::new(FmLibrary(lib)));
        Ok(())
    })
}

/// Number of logic gates in a library, or 0 for a null handle.
///
/// # Safety
/// `lib` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fm_library_gate_count(lib: *const FmLibrary) -> usize {
    lib.as_ref().map(|l| l.0.gates.len()).unwrap_or(0)
}

/// # Safety
/// `lib` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fm_library_free(lib: *mut FmLibrary) {
    if !lib.is_null() {
        drop(Box::from_raw(lib));
    }
}

/// Parse a combinational BLIF netlist. On success `*out` owns a new handle.
///
/// # Safety
/// `blif` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fm_netlist_from_blif(blif: *const c_char, out: *mut *mut FmNetlist) -> FmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let text = text(blif, "blif")?;
        let raw = parse_blif(text).map_err(|e| (FmStatus::ParseError, format!("blif: {e}")))?;
        *out = Box::into_raw(Box::new(FmNetlist(raw)));
        Ok(())
    })
}

/// # Safety
/// `netlist` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fm_netlist_free(netlist: *mut FmNetlist) {
    if !netlist.is_null() {
        drop(Box::from_raw(netlist));
    }
}

/// Map a netlist onto a library. `options` may be null for the defaults.
/// On success `*out` owns a new result handle.
///
/// # Safety
/// `netlist` and `lib` must be live handles, `options` null or valid, and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fm_map(
    netlist: *const FmNetlist,
    lib: *const FmLibrary,
    options: *const FmMapOptions,
    out: *mut *mut FmResult,
) -> FmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let raw = &handle(netlist, "netlist")?.0;
        let lib = &handle(lib, "lib")?.0;
        let o = options.as_ref().copied().unwrap_or_else(|| fm_map_options_default());
        let cfg = MapConfig {
            cut_size: (o.cut_size != 0).then_some(o.cut_size as usize),
            peephole: PeepholeConfig::with_iterations(o.iterations as usize),
            balance_outputs: o.balance_outputs,
            baseline: o.baseline,
            ..MapConfig::default()
        };
        let map_err = |e: fluxmap::error::MapError| (FmStatus::MapError, e.to_string());
        let outcome = map_netlist(raw, lib, &cfg).map_err(map_err)?;
        if o.verify {
            verify_mapping(raw, &outcome.network, lib).map_err(|e| (FmStatus::VerifyError, e.to_string()))?;
        }
        let blif = write_mapped_blif(&outcome.network, lib).map_err(map_err)?;
        let report = write_run_report(&outcome.run_report(cfg.mode_name()));
        *out = Box::into_raw(Box::new(FmResult { outcome, blif, report }));
        Ok(())
    })
}

/// Statistics before (`phase1`) and after PSD tuning (`final`). Either
/// destination may be null.
///
/// # Safety
/// `result` must be a live handle; non-null destinations must be valid.
#[no_mangle]
pub unsafe extern "C" fn fm_result_stats(
    result: *const FmResult,
    phase1: *mut FmStats,
    final_: *mut FmStats,
) -> FmStatus {
    guard(|| {
        let r = handle(result, "result")?;
        if let Some(p) = phase1.as_mut() {
            *p = r.outcome.phase1_stats.into();
        }
        if let Some(f) = final_.as_mut() {
            *f = r.outcome.stats.into();
        }
        Ok(())
    })
}

/// The mapped netlist as BLIF. `*out` receives a string to release with
/// [`fm_string_free`].
///
/// # Safety
/// `result` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fm_result_blif(result: *const FmResult, out: *mut *mut c_char) -> FmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        *out = to_c(&handle(result, "result")?.blif)?;
        Ok(())
    })
}

/// The run report as `key=value` lines. `*out` receives a string to release
/// with [`fm_string_free`].
///
/// # Safety
/// `result` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fm_result_report(result: *const FmResult, out: *mut *mut c_char) -> FmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        *out = to_c(&handle(result, "result")?.report)?;
        Ok(())
    })
}

/// # Safety
/// `result` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fm_result_free(result: *mut FmResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn fm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map(|c| c.as_ptr()).unwrap_or(ptr::null()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn fm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
