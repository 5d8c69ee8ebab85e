//! C interface to `kgr`. Graphs and measures live behind opaque handles;
//! every call returns a [`KgrStatus`] and, on failure, leaves a message for
//! [`kgr_last_error_message`]. Strings handed out are released with
//! [`kgr_string_free`].

use kgr::kgraph::{Degree, KGraph};
use kgr::measures::{hellinger_affinity, measure_from_json, AffinityThresholds, CylinderMeasure};
use kgr::numeric::Surd;
use kgr::projsys::LambdaProjectiveSystem;
use kgr::repn::{ck_checks, partial_isometry_check, pvm_checks, PathModel};
use kgr::report::{all_pass, CheckRecord};
use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KgrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    Panic = 4,
}

/// A validated k-graph.
pub struct KgrGraph {
    graph: Arc<KGraph>,
}

/// A cylinder measure on the path space of a [`KgrGraph`].
pub struct KgrMeasure {
    measure: CylinderMeasure,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(text).ok());
}

struct Failure(KgrStatus, String);

impl Failure {
    fn input(e: impl std::fmt::Display) -> Self {
        Failure(KgrStatus::InvalidInput, e.to_string())
    }
}

/// Runs `body`, turning errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> KgrStatus {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => KgrStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_error(message);
            KgrStatus::Panic
        }
    }
}

unsafe fn text<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(Failure(KgrStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| Failure(KgrStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, Failure> {
    ptr.as_ref()
        .ok_or_else(|| Failure(KgrStatus::NullPointer, format!("{what} is null")))
}

fn out_ptr<T>(ptr: *mut T, what: &str) -> Result<(), Failure> {
    if ptr.is_null() {
        return Err(Failure(KgrStatus::NullPointer, format!("{what} is null")));
    }
    Ok(())
}

/// Parses and validates a graph description.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn kgr_graph_load_json(json: *const c_char, out: *mut *mut KgrGraph) -> KgrStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let json = text(json, "json")?;
        let graph = KGraph::from_json(json).map_err(Failure::input)?;
        *out = Box::into_raw(Box::new(KgrGraph { graph: Arc::new(graph) }));
        Ok(())
    })
}

/// # Safety
/// `graph` must come from [`kgr_graph_load_json`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn kgr_graph_free(graph: *mut KgrGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Number of paths of degree `degree[0..k]`.
///
/// # Safety
/// `degree` must point to `k` integers.
#[no_mangle]
pub unsafe extern "C" fn kgr_path_count(
    graph: *const KgrGraph,
    degree: *const u32,
    k: usize,
    out: *mut u64,
) -> KgrStatus {
    guard(|| {
        let graph = &handle(graph, "graph")?.graph;
        out_ptr(out, "out")?;
        if degree.is_null() && k > 0 {
            return Err(Failure(KgrStatus::NullPointer, "degree is null".into()));
        }
        if k != graph.k() {
            return Err(Failure::input(format!(
                "degree has {k} coordinates, the graph has rank {}",
                graph.k()
            )));
        }
        let coords = if k == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(degree, k).to_vec()
        };
        *out = graph.enumerate_paths(&Degree::new(coords)).len() as u64;
        Ok(())
    })
}

/// Parses a measure file for `graph`. The measure keeps the graph alive.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn kgr_measure_load_json(
    graph: *const KgrGraph,
    json: *const c_char,
    out: *mut *mut KgrMeasure,
) -> KgrStatus {
    guard(|| {
        let graph = handle(graph, "graph")?.graph.clone();
        out_ptr(out, "out")?;
        let json = text(json, "json")?;
        let measure = measure_from_json(graph, json).map_err(Failure::input)?;
        *out = Box::into_raw(Box::new(KgrMeasure { measure }));
        Ok(())
    })
}

/// # Safety
/// `measure` must come from [`kgr_measure_load_json`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn kgr_measure_free(measure: *mut KgrMeasure) {
    if !measure.is_null() {
        drop(Box::from_raw(measure));
    }
}

/// `μ(Z(λ))` for a path written as dotted edge names, or a vertex name.
///
/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn kgr_measure_mass(measure: *const KgrMeasure, path: *const c_char, out: *mut f64) -> KgrStatus {
    guard(|| {
        let measure = &handle(measure, "measure")?.measure;
        out_ptr(out, "out")?;
        let lambda = measure
            .graph()
            .parse_path(text(path, "path")?)
            .map_err(Failure::input)?;
        *out = measure.mass(&lambda).map_err(Failure::input)?.to_f64();
        Ok(())
    })
}

/// Hellinger affinity `H_N = Σ √(μ(Z(ζ))ν(Z(ζ)))` over the atoms of depth `depth`.
///
/// # Safety
/// Both handles must be live.
#[no_mangle]
pub unsafe extern "C" fn kgr_hellinger(
    first: *const KgrMeasure,
    second: *const KgrMeasure,
    depth: u32,
    out: *mut f64,
) -> KgrStatus {
    guard(|| {
        let first = &handle(first, "first")?.measure;
        let second = &handle(second, "second")?.measure;
        out_ptr(out, "out")?;
        if depth == 0 {
            return Err(Failure::input("depth must be positive"));
        }
        let affinity =
            hellinger_affinity(first, second, depth, AffinityThresholds::default()).map_err(Failure::input)?;
        *out = *affinity.values.last().expect("depth is positive");
        Ok(())
    })
}

fn ck_records<S: kgr::numeric::Scalar>(
    measure: &CylinderMeasure,
    ambient: u32,
    cap: u32,
    tol: f64,
) -> Result<Vec<CheckRecord>, Failure> {
    let cap = Degree::uniform(measure.graph().k(), cap);
    let depth = ambient
        .checked_sub(cap.max_coord())
        .ok_or_else(|| Failure::input("ambient depth is below the cap"))?;
    let system = LambdaProjectiveSystem::<S>::standard(measure, depth, &cap).map_err(Failure::input)?;
    let mut records = system.verify(tol).map_err(Failure::input)?;
    let model = PathModel::new(system, ambient, None).map_err(Failure::input)?;
    records.extend(ck_checks(&model, tol));
    records.push(partial_isometry_check(&model, tol));
    records.extend(pvm_checks(&model, tol));
    Ok(records)
}

/// Runs the Cuntz-Krieger and projection-valued measure checks of the
/// standard representation on `H_ambient` with cap `(cap,…,cap)`. Writes the
/// check records as a JSON array to `report` and whether all passed to
/// `pass`. Exact arithmetic when `exact` is nonzero.
///
/// # Safety
/// `report` and `pass` must be writable; free `*report` with
/// [`kgr_string_free`].
#[no_mangle]
pub unsafe extern "C" fn kgr_run_ck(
    measure: *const KgrMeasure,
    ambient: u32,
    cap: u32,
    tol: f64,
    exact: c_int,
    report: *mut *mut c_char,
    pass: *mut c_int,
) -> KgrStatus {
    guard(|| {
        let measure = &handle(measure, "measure")?.measure;
        out_ptr(report, "report")?;
        out_ptr(pass, "pass")?;
        let records = if exact != 0 {
            if !measure.is_exact() {
                return Err(Failure::input("exact arithmetic needs a rational measure"));
            }
            ck_records::<Surd>(measure, ambient, cap, tol)?
        } else {
            ck_records::<f64>(measure, ambient, cap, tol)?
        };
        let json = serde_json::to_string(&records).expect("records serialize");
        *report = CString::new(json).expect("JSON has no NUL").into_raw();
        *pass = c_int::from(all_pass(&records));
        Ok(())
    })
}

/// Message of the last failed call on this thread, or null. Valid until
/// the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn kgr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn kgr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(s: &str) -> CString {
        CString::new(s).unwrap()
    }

    #[test]
    fn null_arguments_are_reported() {
        let mut out = ptr::null_mut();
        let status = unsafe { kgr_graph_load_json(ptr::null(), &mut out) };
        assert_eq!(status, KgrStatus::NullPointer);
        let message = unsafe { CStr::from_ptr(kgr_last_error_message()) };
        assert_eq!(message.to_str().unwrap(), "json is null");
        assert!(out.is_null());
    }

    #[test]
    fn bad_json_is_invalid_input() {
        let mut out = ptr::null_mut();
        let status = unsafe { kgr_graph_load_json(c("{").as_ptr(), &mut out) };
        assert_eq!(status, KgrStatus::InvalidInput);
        assert!(!kgr_last_error_message().is_null());
    }

    #[test]
    fn success_clears_the_error() {
        let mut out = ptr::null_mut();
        unsafe { kgr_graph_load_json(c("{").as_ptr(), &mut out) };
        let status = unsafe { kgr_graph_load_json(c(kgr::fixtures::G2).as_ptr(), &mut out) };
        assert_eq!(status, KgrStatus::Ok);
        assert!(kgr_last_error_message().is_null());
        unsafe { kgr_graph_free(out) };
    }
}
