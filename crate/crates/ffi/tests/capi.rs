use std::ffi::{CStr, CString};
use std::ptr;

use dqc_layout_ffi::*;

fn last_error() -> String {
    let p = dqc_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn generate(name: &str) -> *mut DqcCircuit {
    let name = CString::new(name).unwrap();
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { dqc_circuit_generate(name.as_ptr(), 0, &mut c) }, DqcStatus::Ok);
    c
}

fn target(json: &str) -> *mut DqcTarget {
    let json = CString::new(json).unwrap();
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { dqc_target_from_json(json.as_ptr(), &mut t) }, DqcStatus::Ok);
    t
}

const HEAVY_HEX_K4: &str = r#"{"controllers": {"kind": "star", "k": 4}, "device": {"kind": "heavy_hex_127"}}"#;

fn options(mode: DqcMode) -> DqcOptions {
    DqcOptions { mode, cost_mode: DqcCostMode::Pair, seed: 1, sweeps: 1 }
}

#[test]
fn transpiles_dqft20_without_cross_controller_cost() {
    let c = generate("dqft-20");
    let t = target(HEAVY_HEX_K4);
    assert_eq!(unsafe { dqc_circuit_num_qubits(c) }, 20);
    assert_eq!(unsafe { dqc_target_num_qubits(t) }, 127);
    let mut m = DqcMetrics::default();
    let mut qasm = ptr::null_mut();
    let status = unsafe { dqc_transpile(c, t, &options(DqcMode::Class), &mut m, &mut qasm) };
    assert_eq!(status, DqcStatus::Ok);
    assert!(dqc_last_error_message().is_null());
    assert_eq!(m.iccs, 0);
    assert_eq!(m.qubits, 20);
    assert_eq!(m.operations, unsafe { dqc_circuit_num_ops(c) });
    let text = unsafe { CStr::from_ptr(qasm) }.to_str().unwrap().to_owned();
    assert!(text.contains("qreg q[127];"));
    unsafe {
        dqc_string_free(qasm);
        dqc_circuit_free(c);
        dqc_target_free(t);
    }
}

#[test]
fn qasm_round_trips_through_the_interface() {
    let c = generate("ipe-5");
    let mut text = ptr::null_mut();
    assert_eq!(unsafe { dqc_circuit_to_qasm(c, &mut text) }, DqcStatus::Ok);
    let mut back = ptr::null_mut();
    assert_eq!(unsafe { dqc_circuit_parse(text, &mut back) }, DqcStatus::Ok);
    assert_eq!(unsafe { dqc_circuit_num_ops(back) }, unsafe { dqc_circuit_num_ops(c) });
    unsafe {
        dqc_string_free(text);
        dqc_circuit_free(c);
        dqc_circuit_free(back);
    }
}

#[test]
fn placement_fills_the_layout_buffer() {
    let c = generate("dqft-4");
    let t = target(r#"{"controllers": {"kind": "star", "k": 2}, "device": {"kind": "line", "m": 4}}"#);
    let mut layout = [usize::MAX; 4];
    let mut iccs = u64::MAX;
    let opts = options(DqcMode::Class);
    assert_eq!(unsafe { dqc_place(c, t, &opts, layout.as_mut_ptr(), 4, &mut iccs) }, DqcStatus::Ok);
    assert_eq!(iccs, 2);
    let mut sorted = layout;
    sorted.sort_unstable();
    assert_eq!(sorted, [0, 1, 2, 3]);

    assert_eq!(unsafe { dqc_place(c, t, &opts, layout.as_mut_ptr(), 3, &mut iccs) }, DqcStatus::BufferTooSmall);
    assert!(last_error().contains("needs 4"));
    unsafe {
        dqc_circuit_free(c);
        dqc_target_free(t);
    }
}

#[test]
fn baseline_is_reproducible() {
    let c = generate("cc-8");
    let t = target(HEAVY_HEX_K4);
    let run = || {
        let mut m = DqcMetrics::default();
        assert_eq!(unsafe { dqc_transpile(c, t, &options(DqcMode::Baseline), &mut m, ptr::null_mut()) }, DqcStatus::Ok);
        (m.iccs, m.operations, m.depth, m.swaps_inserted)
    };
    assert_eq!(run(), run());
    unsafe {
        dqc_circuit_free(c);
        dqc_target_free(t);
    }
}

#[test]
fn errors_carry_status_and_message() {
    let mut c = ptr::null_mut();
    let bad = CString::new("OPENQASM 2.0;\nqreg q[1];\nfoo q[0];\n").unwrap();
    assert_eq!(unsafe { dqc_circuit_parse(bad.as_ptr(), &mut c) }, DqcStatus::Parse);
    assert!(c.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(unsafe { dqc_circuit_parse(ptr::null(), &mut c) }, DqcStatus::NullPointer);
    let name = CString::new("nonsense").unwrap();
    assert_eq!(unsafe { dqc_circuit_generate(name.as_ptr(), 0, &mut c) }, DqcStatus::InvalidArgument);

    let mut t = ptr::null_mut();
    let json = CString::new(r#"{"controllers": {"kind": "star", "k": 0}, "device": {"kind": "line", "m": 4}}"#).unwrap();
    assert_eq!(unsafe { dqc_target_from_json(json.as_ptr(), &mut t) }, DqcStatus::Topology);

    let big = generate("dqft-8");
    let small = target(r#"{"controllers": {"kind": "star", "k": 2}, "device": {"kind": "line", "m": 4}}"#);
    let mut m = DqcMetrics::default();
    let status = unsafe { dqc_transpile(big, small, &options(DqcMode::Class), &mut m, ptr::null_mut()) };
    assert_ne!(status, DqcStatus::Ok);
    assert!(last_error().contains("qubits"));
    unsafe {
        dqc_circuit_free(big);
        dqc_target_free(small);
        dqc_circuit_free(ptr::null_mut());
        dqc_string_free(ptr::null_mut());
    }
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/dqc_layout.h");
    let Ok(out) = std::process::Command::new("cc").args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c", header]).output()
    else {
        eprintln!("no C compiler, skipping");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
