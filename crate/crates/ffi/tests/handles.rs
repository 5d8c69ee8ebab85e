use kgr_ffi::*;
use std::ffi::{CStr, CString};
use std::ptr;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn load_graph(json: &str) -> *mut KgrGraph {
    let mut graph = ptr::null_mut();
    assert_eq!(
        unsafe { kgr_graph_load_json(c(json).as_ptr(), &mut graph) },
        KgrStatus::Ok
    );
    graph
}

fn load_measure(graph: *const KgrGraph, json: &str) -> *mut KgrMeasure {
    let mut measure = ptr::null_mut();
    let status = unsafe { kgr_measure_load_json(graph, c(json).as_ptr(), &mut measure) };
    assert_eq!(status, KgrStatus::Ok);
    measure
}

#[test]
fn path_counts_on_g2() {
    let graph = load_graph(kgr::fixtures::G2);
    for m in 0..=4u32 {
        for n in 0..=2u32 {
            let mut count = 0u64;
            let degree = [m, n];
            assert_eq!(
                unsafe { kgr_path_count(graph, degree.as_ptr(), 2, &mut count) },
                KgrStatus::Ok
            );
            assert_eq!(count, 1 << m);
        }
    }
    let mut count = 0u64;
    let status = unsafe { kgr_path_count(graph, [1u32].as_ptr(), 1, &mut count) };
    assert_eq!(status, KgrStatus::InvalidInput);
    unsafe { kgr_graph_free(graph) };
}

#[test]
fn masses_and_affinity() {
    let graph = load_graph(kgr::fixtures::G2);
    let quarter = load_measure(graph, kgr::fixtures::MARKOV_1_4);
    let three = load_measure(graph, kgr::fixtures::MARKOV_3_4);
    // The measures keep the graph alive.
    unsafe { kgr_graph_free(graph) };
    let mut mass = 0.0;
    assert_eq!(
        unsafe { kgr_measure_mass(quarter, c("f1.e").as_ptr(), &mut mass) },
        KgrStatus::Ok
    );
    let direct = kgr::measures::measure_from_json(kgr::fixtures::g2(), kgr::fixtures::MARKOV_1_4).unwrap();
    let lambda = kgr::fixtures::g2().parse_path("f1.e").unwrap();
    assert_eq!(mass, direct.mass(&lambda).unwrap().to_f64());
    let status = unsafe { kgr_measure_mass(quarter, c("nope").as_ptr(), &mut mass) };
    assert_eq!(status, KgrStatus::InvalidInput);
    for n in 1..=12 {
        let mut h = 0.0;
        assert_eq!(unsafe { kgr_hellinger(quarter, three, n, &mut h) }, KgrStatus::Ok);
        let closed = 2.0 * (3f64.sqrt() / 2.0).powi(n as i32 - 1);
        assert!((h - closed).abs() < 1e-9);
    }
    unsafe {
        kgr_measure_free(quarter);
        kgr_measure_free(three);
    }
}

#[test]
fn ck_report_round_trip() {
    let graph = load_graph(kgr::fixtures::G2);
    let measure = load_measure(graph, kgr::fixtures::MARKOV_1_3);
    for exact in [1, 0] {
        let mut report = ptr::null_mut();
        let mut pass = -1;
        let status = unsafe { kgr_run_ck(measure, 5, 2, 1e-9, exact, &mut report, &mut pass) };
        assert_eq!(status, KgrStatus::Ok);
        assert_eq!(pass, 1);
        let text = unsafe { CStr::from_ptr(report) }.to_str().unwrap().to_string();
        let records: serde_json::Value = serde_json::from_str(&text).unwrap();
        let names: Vec<&str> = records
            .as_array()
            .unwrap()
            .iter()
            .map(|r| r["name"].as_str().unwrap())
            .collect();
        assert!(names.contains(&"CK3") && names.contains(&"pvm-d"));
        if exact == 1 {
            assert!(records.as_array().unwrap().iter().all(|r| r["max_deviation"] == 0.0));
        }
        unsafe { kgr_string_free(report) };
    }
    let mut report = ptr::null_mut();
    let mut pass = 0;
    let status = unsafe { kgr_run_ck(measure, 1, 2, 1e-9, 1, &mut report, &mut pass) };
    assert_eq!(status, KgrStatus::InvalidInput);
    assert!(report.is_null());
    let message = unsafe { CStr::from_ptr(kgr_last_error_message()) };
    assert!(message.to_str().unwrap().contains("below the cap"));
    unsafe {
        kgr_measure_free(measure);
        kgr_graph_free(graph);
    }
}

#[test]
fn null_handles() {
    let mut out = 0u64;
    assert_eq!(
        unsafe { kgr_path_count(ptr::null(), ptr::null(), 0, &mut out) },
        KgrStatus::NullPointer
    );
    let mut h = 0.0;
    assert_eq!(
        unsafe { kgr_hellinger(ptr::null(), ptr::null(), 1, &mut h) },
        KgrStatus::NullPointer
    );
    unsafe {
        kgr_graph_free(ptr::null_mut());
        kgr_measure_free(ptr::null_mut());
        kgr_string_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_the_interface() {
    let header = include_str!("../include/kgr.h");
    for name in [
        "kgr_graph_load_json",
        "kgr_graph_free",
        "kgr_measure_load_json",
        "kgr_measure_free",
        "kgr_path_count",
        "kgr_measure_mass",
        "kgr_run_ck",
        "kgr_hellinger",
        "kgr_last_error_message",
        "kgr_string_free",
        "KGR_STATUS_OK",
        "typedef struct KgrGraph KgrGraph;",
    ] {
        assert!(header.contains(name), "{name}");
    }
}
