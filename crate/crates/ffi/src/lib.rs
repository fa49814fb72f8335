//! C ABI for the mpsplit simulator.
//!
//! Handles are opaque and owned by the caller once returned; release them
//! with the matching `*_free`. Every fallible call returns an [`MpsStatus`];
//! on failure a description is available from [`mps_last_error_message`]
//! on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use mpsplit::channel::LinkState;
use mpsplit::config::{load_config, scenario_preset, SolverSettings, TrafficTypeSpec};
use mpsplit::metrics::export;
use mpsplit::mobility::Point;
use mpsplit::optimizer::{solve, Problem};
use mpsplit::traffic::{IntervalSample, TrafficSample};
use mpsplit::{run, summarize, Error, ExperimentConfig, RunResult, SolutionKind, Summary};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MpsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// The configuration could not be parsed or failed validation.
    Config = 3,
    /// The simulation or solver failed.
    Runtime = 4,
    Io = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MpsSolution {
    MultiPath = 0,
    SinglePath1 = 1,
    SinglePath2 = 2,
    PathSelection = 3,
}

impl From<MpsSolution> for SolutionKind {
    fn from(s: MpsSolution) -> Self {
        match s {
            MpsSolution::MultiPath => SolutionKind::MultiPath,
            MpsSolution::SinglePath1 => SolutionKind::SinglePath1,
            MpsSolution::SinglePath2 => SolutionKind::SinglePath2,
            MpsSolution::PathSelection => SolutionKind::PathSelection,
        }
    }
}

/// Experiment configuration.
pub struct MpsConfig {
    inner: ExperimentConfig,
}

/// Completed run with its summary.
pub struct MpsRun {
    result: RunResult,
    summary: Summary,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: MpsStatus, msg: impl Into<String>) -> MpsStatus {
    set_last_error(msg);
    status
}

fn from_error(e: Error) -> MpsStatus {
    let status = if e.is_config_error() {
        MpsStatus::Config
    } else {
        match e {
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => MpsStatus::Io,
            _ => MpsStatus::Runtime,
        }
    };
    fail(status, e.to_string())
}

/// Runs `f`, turning panics into [`MpsStatus::Panic`].
fn guard(f: impl FnOnce() -> MpsStatus) -> MpsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(MpsStatus::Panic, "internal panic"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, MpsStatus> {
    if p.is_null() {
        return Err(fail(MpsStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(MpsStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

macro_rules! try_status {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(status) => return status,
        }
    };
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mps_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Built-in scenario (`"scenario1"` or `"scenario2"`) at the given total bandwidth.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mps_config_preset(name: *const c_char, bandwidth_hz: f64, out: *mut *mut MpsConfig) -> MpsStatus {
    guard(|| {
        if out.is_null() {
            return fail(MpsStatus::NullPointer, "out is null");
        }
        let name = try_status!(str_arg(name, "name"));
        let preset = match name.parse() {
            Ok(p) => p,
            Err(e) => return from_error(e),
        };
        let inner = scenario_preset(preset, bandwidth_hz);
        if let Err(e) = inner.validate() {
            return from_error(e);
        }
        *out = Box::into_raw(Box::new(MpsConfig { inner }));
        MpsStatus::Ok
    })
}

/// Loads a TOML configuration file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mps_config_load(path: *const c_char, out: *mut *mut MpsConfig) -> MpsStatus {
    guard(|| {
        if out.is_null() {
            return fail(MpsStatus::NullPointer, "out is null");
        }
        let path = try_status!(str_arg(path, "path"));
        match load_config(path) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(MpsConfig { inner }));
                MpsStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mps_config_set_seed(cfg: *mut MpsConfig, seed: u64) -> MpsStatus {
    match cfg.as_mut() {
        Some(c) => {
            c.inner.seed = seed;
            MpsStatus::Ok
        }
        None => fail(MpsStatus::NullPointer, "cfg is null"),
    }
}

/// Dotted-key override, e.g. `("radio.shadowing_sigma_db", "6")`. The
/// configuration is left unchanged when the result would not validate.
///
/// # Safety
/// `cfg` must be a live handle; `key` and `value` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn mps_config_set(cfg: *mut MpsConfig, key: *const c_char, value: *const c_char) -> MpsStatus {
    guard(|| {
        let Some(c) = cfg.as_mut() else {
            return fail(MpsStatus::NullPointer, "cfg is null");
        };
        let key = try_status!(str_arg(key, "key"));
        let value = try_status!(str_arg(value, "value"));
        let mut next = c.inner.clone();
        match next.apply_override(key, value).and_then(|_| next.validate()) {
            Ok(()) => {
                c.inner = next;
                MpsStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `cfg` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mps_config_free(cfg: *mut MpsConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Runs every enabled solution.
///
/// # Safety
/// `cfg` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mps_run(cfg: *const MpsConfig, out: *mut *mut MpsRun) -> MpsStatus {
    guard(|| {
        let Some(c) = cfg.as_ref() else {
            return fail(MpsStatus::NullPointer, "cfg is null");
        };
        if out.is_null() {
            return fail(MpsStatus::NullPointer, "out is null");
        }
        let result = match run(&c.inner) {
            Ok(r) => r,
            Err(e) => return from_error(e),
        };
        let summary = match summarize(&result) {
            Ok(s) => s,
            Err(e) => return from_error(e),
        };
        *out = Box::into_raw(Box::new(MpsRun { result, summary }));
        MpsStatus::Ok
    })
}

/// # Safety
/// `run` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mps_run_interval_count(run: *const MpsRun, out: *mut usize) -> MpsStatus {
    match (run.as_ref(), out.is_null()) {
        (Some(r), false) => {
            *out = r.result.interval_count();
            MpsStatus::Ok
        }
        _ => fail(MpsStatus::NullPointer, "run or out is null"),
    }
}

/// Mean instant latency in seconds of `traffic` (0-based) under `solution`.
///
/// # Safety
/// `run` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mps_run_mean_latency(
    run: *const MpsRun,
    solution: MpsSolution,
    traffic: usize,
    out: *mut f64,
) -> MpsStatus {
    let (Some(r), false) = (run.as_ref(), out.is_null()) else {
        return fail(MpsStatus::NullPointer, "run or out is null");
    };
    let kind = SolutionKind::from(solution);
    let Some(sol) = r.summary.solution(kind) else {
        return fail(MpsStatus::InvalidArgument, format!("solution {kind} was not run"));
    };
    match sol.traffic.get(traffic) {
        Some(t) => {
            *out = t.mean_instant_latency_s;
            MpsStatus::Ok
        }
        None => fail(MpsStatus::InvalidArgument, format!("traffic index {traffic} out of range")),
    }
}

/// Writes the standard output directory for the run.
///
/// # Safety
/// `run` must be a live handle; `out_dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mps_run_export(run: *const MpsRun, out_dir: *const c_char) -> MpsStatus {
    guard(|| {
        let Some(r) = run.as_ref() else {
            return fail(MpsStatus::NullPointer, "run is null");
        };
        let dir = try_status!(str_arg(out_dir, "out_dir"));
        match export(&r.summary, &r.result, Path::new(dir)) {
            Ok(()) => MpsStatus::Ok,
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `run` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mps_run_free(run: *mut MpsRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Solves a single interval with default solver settings.
///
/// Path `p` has bandwidth `bandwidth_hz[p]` and receive SNR per transmitted
/// watt `snr_per_watt[p]`. Traffic type `i` has `packets[i]` packets of
/// `packet_size_bits[i]` bits and GBRs `gbr_bps[2*i]`, `gbr_bps[2*i + 1]`.
/// On success `alphas_out[i]` holds the share of traffic `i` on path 1.
///
/// # Safety
/// Array arguments must hold the documented number of elements; the output
/// pointers must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn mps_solve_interval(
    bandwidth_hz: *const f64,
    snr_per_watt: *const f64,
    p_total_watts: f64,
    n_traffic: usize,
    packets: *const u64,
    packet_size_bits: *const u64,
    gbr_bps: *const f64,
    alphas_out: *mut f64,
    p1_watts_out: *mut f64,
    objective_s_out: *mut f64,
) -> MpsStatus {
    guard(|| {
        if [bandwidth_hz, snr_per_watt, gbr_bps].iter().any(|p| p.is_null())
            || packets.is_null()
            || packet_size_bits.is_null()
            || alphas_out.is_null()
            || p1_watts_out.is_null()
            || objective_s_out.is_null()
        {
            return fail(MpsStatus::NullPointer, "null array or output pointer");
        }
        if n_traffic == 0 {
            return fail(MpsStatus::InvalidArgument, "n_traffic must be > 0");
        }
        let bw = std::slice::from_raw_parts(bandwidth_hz, 2);
        let g = std::slice::from_raw_parts(snr_per_watt, 2);
        let pkts = std::slice::from_raw_parts(packets, n_traffic);
        let sizes = std::slice::from_raw_parts(packet_size_bits, n_traffic);
        let gbr = std::slice::from_raw_parts(gbr_bps, 2 * n_traffic);

        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !(bw.iter().all(|&b| positive(b)) && g.iter().all(|&v| v.is_finite() && v >= 0.0) && positive(p_total_watts)) {
            return fail(MpsStatus::InvalidArgument, "bandwidth and power must be positive, SNR nonnegative");
        }
        if !(gbr.iter().all(|&c| positive(c)) && sizes.iter().all(|&s| s > 0)) {
            return fail(MpsStatus::InvalidArgument, "GBRs and packet sizes must be positive");
        }

        let traffic: Vec<TrafficTypeSpec> = (0..n_traffic)
            .map(|i| TrafficTypeSpec {
                packet_size_bits: sizes[i],
                gbr_path1_range_bps: [gbr[2 * i]; 2],
                gbr_path2_range_bps: [gbr[2 * i + 1]; 2],
                ..TrafficTypeSpec::reference_traffic1()
            })
            .collect();
        let sample = IntervalSample {
            interval: 0,
            ue_position: Point::default(),
            shadowing_db: [0.0; 2],
            traffic: (0..n_traffic)
                .map(|i| TrafficSample {
                    arrivals_pkts: pkts[i],
                    queued_pkts: 0,
                    gbr_bps: [gbr[2 * i], gbr[2 * i + 1]],
                })
                .collect(),
        };
        let links = [
            LinkState::from_snr_per_watt(bw[0], g[0]),
            LinkState::from_snr_per_watt(bw[1], g[1]),
        ];
        let problem = Problem {
            sample: &sample,
            links: &links,
            traffic: &traffic,
            p_total_watts,
        };
        match solve(&problem, &SolverSettings::default()) {
            Ok(rec) => {
                std::slice::from_raw_parts_mut(alphas_out, n_traffic).copy_from_slice(&rec.decision.alphas);
                *p1_watts_out = rec.decision.p1_watts;
                *objective_s_out = rec.objective_s;
                MpsStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}
