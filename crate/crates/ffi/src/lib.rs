//! C interface to the layout pipeline.
//!
//! Circuits and targets are opaque handles owned by the caller and released
//! with their `_free` function. Every call returns a [`DqcStatus`]; on
//! failure [`dqc_last_error_message`] describes what went wrong. Strings
//! returned through out-pointers are released with [`dqc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dqc_layout::benchgen::Benchmark;
use dqc_layout::cidq::{extract_cidq_sets, CostMode};
use dqc_layout::circuit::{parse_circuit, Circuit};
use dqc_layout::control::{Target, TopologyConfig};
use dqc_layout::pipeline::{transpile, TranspileOptions};
use dqc_layout::placement::{initial_placement, PlacementOptions};
use dqc_layout::scheduler::RoutingMode;
use dqc_layout::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DqcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidArgument = 4,
    Topology = 5,
    Placement = 6,
    Routing = 7,
    BufferTooSmall = 8,
    Panic = 99,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DqcMode {
    Class = 0,
    Baseline = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DqcCostMode {
    Pair = 0,
    PerTarget = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct DqcOptions {
    pub mode: DqcMode,
    pub cost_mode: DqcCostMode,
    pub seed: u64,
    /// Number of refinement sweeps; 0 is treated as 1.
    pub sweeps: usize,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct DqcMetrics {
    pub qubits: usize,
    pub input_operations: usize,
    pub operations: usize,
    pub depth: usize,
    pub iccs: u64,
    pub placement_iccs: u64,
    pub swaps_inserted: usize,
    pub forced_swaps: usize,
    pub runtime_ms: f64,
}

/// Opaque circuit handle.
pub struct DqcCircuit {
    inner: Circuit,
}

/// Opaque handle to a device plus its controllers.
pub struct DqcTarget {
    inner: Target,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(DqcStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Parse(_) | Error::Circuit(_) => DqcStatus::Parse,
            Error::Topology(_) => DqcStatus::Topology,
            Error::Mapping(_) | Error::Placement(_) | Error::Oracle(_) => DqcStatus::Placement,
            Error::Routing(_) => DqcStatus::Routing,
            _ => DqcStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn fail<T>(status: DqcStatus, msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, msg.into()))
}

/// Runs `f`, converting errors and panics into a status plus message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DqcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            DqcStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            DqcStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return fail(DqcStatus::NullPointer, format!("{what} is null"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(DqcStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure(DqcStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| Failure(DqcStatus::NullPointer, format!("{what} is null")))
}

fn options(o: &DqcOptions) -> TranspileOptions {
    TranspileOptions {
        mode: match o.mode {
            DqcMode::Class => RoutingMode::Class,
            DqcMode::Baseline => RoutingMode::Baseline,
        },
        cost_mode: cost_mode(o.cost_mode),
        seed: o.seed,
        sweeps: o.sweeps.max(1),
        ..Default::default()
    }
}

fn cost_mode(m: DqcCostMode) -> CostMode {
    match m {
        DqcCostMode::Pair => CostMode::Pair,
        DqcCostMode::PerTarget => CostMode::PerTarget,
    }
}

/// Message for the last failed call on this thread, or null after a
/// successful call. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn dqc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses OpenQASM 2.0 text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn dqc_circuit_parse(text: *const c_char, out: *mut *mut DqcCircuit) -> DqcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let circuit = parse_circuit(str_arg(text, "text")?).map_err(Error::from)?;
        *out = Box::into_raw(Box::new(DqcCircuit { inner: circuit }));
        Ok(())
    })
}

/// Generates a benchmark circuit by name, e.g. `dqft-20`, `ipe-12`, `cc-8`
/// or `random-20`. `seed` only affects the random family.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn dqc_circuit_generate(name: *const c_char, seed: u64, out: *mut *mut DqcCircuit) -> DqcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let bench: Benchmark =
            str_arg(name, "name")?.parse().map_err(|e: String| Failure(DqcStatus::InvalidArgument, e))?;
        let circuit = bench.with_seed(seed).generate().map_err(|e| Failure(DqcStatus::InvalidArgument, e))?;
        *out = Box::into_raw(Box::new(DqcCircuit { inner: circuit }));
        Ok(())
    })
}

/// # Safety
/// `circuit` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dqc_circuit_free(circuit: *mut DqcCircuit) {
    if !circuit.is_null() {
        drop(Box::from_raw(circuit));
    }
}

/// Number of qubits, or 0 for a null handle.
///
/// # Safety
/// `circuit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dqc_circuit_num_qubits(circuit: *const DqcCircuit) -> usize {
    circuit.as_ref().map_or(0, |c| c.inner.n_qubits())
}

/// Operation count excluding barriers, or 0 for a null handle.
///
/// # Safety
/// `circuit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dqc_circuit_num_ops(circuit: *const DqcCircuit) -> usize {
    circuit.as_ref().map_or(0, |c| c.inner.count_ops())
}

/// Serializes a circuit to OpenQASM 2.0. Free the result with
/// [`dqc_string_free`].
///
/// # Safety
/// `circuit` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn dqc_circuit_to_qasm(circuit: *const DqcCircuit, out: *mut *mut c_char) -> DqcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let text = ref_arg(circuit, "circuit")?.inner.to_qasm();
        *out = CString::new(text).map_err(|e| Failure(DqcStatus::InvalidArgument, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dqc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a target from a topology document such as
/// `{"controllers": {"kind": "star", "k": 4}, "device": {"kind": "heavy_hex_127"}}`.
/// Relative edge-list paths resolve against the working directory.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn dqc_target_from_json(json: *const c_char, out: *mut *mut DqcTarget) -> DqcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let config = TopologyConfig::from_json(str_arg(json, "json")?).map_err(Error::from)?;
        let target = config.build(None).map_err(Error::from)?;
        *out = Box::into_raw(Box::new(DqcTarget { inner: target }));
        Ok(())
    })
}

/// # Safety
/// `target` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dqc_target_free(target: *mut DqcTarget) {
    if !target.is_null() {
        drop(Box::from_raw(target));
    }
}

/// Number of physical qubits of the target, or 0 for a null handle.
///
/// # Safety
/// `target` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dqc_target_num_qubits(target: *const DqcTarget) -> usize {
    target.as_ref().map_or(0, |t| t.inner.device.m())
}

/// Places and routes `circuit` on `target`. `metrics` receives the report;
/// when `qasm_out` is non-null it receives the routed program, to be freed
/// with [`dqc_string_free`].
///
/// # Safety
/// Handles must be live; `options` and `metrics` must be valid pointers;
/// `qasm_out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn dqc_transpile(
    circuit: *const DqcCircuit,
    target: *const DqcTarget,
    options: *const DqcOptions,
    metrics: *mut DqcMetrics,
    qasm_out: *mut *mut c_char,
) -> DqcStatus {
    guard(|| {
        let circuit = &ref_arg(circuit, "circuit")?.inner;
        let target = &ref_arg(target, "target")?.inner;
        let opts = self::options(ref_arg(options, "options")?);
        let metrics = out_arg(metrics, "metrics")?;
        let t = transpile(circuit, "circuit", target, &opts)?;
        let r = &t.report;
        *metrics = DqcMetrics {
            qubits: r.qubits,
            input_operations: r.input_operations,
            operations: r.operations,
            depth: r.depth,
            iccs: r.iccs,
            placement_iccs: r.placement_iccs,
            swaps_inserted: r.swaps_inserted,
            forced_swaps: r.forced_swaps,
            runtime_ms: r.runtime_ms,
        };
        if let Some(q) = qasm_out.as_mut() {
            *q = CString::new(t.physical.to_qasm()).map_err(|e| Failure(DqcStatus::InvalidArgument, e.to_string()))?.into_raw();
        }
        Ok(())
    })
}

/// Runs feedforward-aware placement only. `layout` receives the physical
/// qubit of each logical qubit and must hold at least the circuit's qubit
/// count; `iccs` receives the cost of the placement. `options.mode` is
/// ignored.
///
/// # Safety
/// Handles must be live; `options` and `iccs` must be valid pointers;
/// `layout` must point to `layout_len` writable elements.
#[no_mangle]
pub unsafe extern "C" fn dqc_place(
    circuit: *const DqcCircuit,
    target: *const DqcTarget,
    options: *const DqcOptions,
    layout: *mut usize,
    layout_len: usize,
    iccs: *mut u64,
) -> DqcStatus {
    guard(|| {
        let circuit = &ref_arg(circuit, "circuit")?.inner;
        let target = &ref_arg(target, "target")?.inner;
        let o = ref_arg(options, "options")?;
        let iccs = out_arg(iccs, "iccs")?;
        if layout.is_null() {
            return fail(DqcStatus::NullPointer, "layout is null");
        }
        let n = circuit.n_qubits();
        if layout_len < n {
            return fail(DqcStatus::BufferTooSmall, format!("layout needs {n} entries, got {layout_len}"));
        }
        if n > target.device.m() {
            return fail(DqcStatus::InvalidArgument, format!("circuit has {n} qubits, device only {}", target.device.m()));
        }
        let ld = extract_cidq_sets(circuit);
        let popts = PlacementOptions { mode: cost_mode(o.cost_mode), seed: o.seed, sweeps: o.sweeps.max(1) };
        let p = initial_placement(n, &ld, &target.controllers, &target.topology, &popts).map_err(Error::from)?;
        let out = std::slice::from_raw_parts_mut(layout, n);
        for (q, slot) in out.iter_mut().enumerate() {
            *slot = p.mapping.physical(q).expect("complete placement");
        }
        *iccs = p.cost;
        Ok(())
    })
}
