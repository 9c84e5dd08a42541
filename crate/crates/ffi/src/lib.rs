//! C ABI over the experiment harness.
//!
//! Every fallible entry point returns an [`SsStatus`] and writes its result
//! through an out-pointer that is left untouched on failure. The message for
//! the most recent failure on the calling thread is available from
//! [`ss_last_error_message`]. Handles and strings returned here are owned by
//! the caller and must be released with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_bigint::BigInt;
use num_rational::BigRational;
use substream_core::harness::experiment::{run_experiment, AlgorithmId, ExperimentConfig, RunReport};
use substream_core::harness::instance::{Instance, InstanceFile};
use substream_core::harness::tables::{emit_table, Table};

/// Outcome of an FFI call. Zero is success.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Parse = 4,
    Io = 5,
    Panic = 6,
}

/// A validated instance description together with its materialized oracle.
pub struct SsInstance {
    file: InstanceFile,
    inst: Instance,
}

/// The full report of a multi-trial experiment.
pub struct SsReport {
    report: RunReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("interior nuls replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

struct Failure(SsStatus, String);

impl From<substream_core::Error> for Failure {
    fn from(err: substream_core::Error) -> Self {
        use substream_core::Error as E;
        let status = match err {
            E::Json(_) => SsStatus::Parse,
            E::Io(_) => SsStatus::Io,
            _ => SsStatus::InvalidArgument,
        };
        Failure(status, err.to_string())
    }
}

/// Runs `body`, mapping errors and panics to a status and recording the message.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> SsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => SsStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            SsStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(SsStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `p` is null or a valid nul-terminated string.
unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(SsStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

/// # Safety
/// `out` is null or valid for a pointer write.
unsafe fn write_out<T>(out: *mut *mut T, value: *mut T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = value;
    Ok(())
}

/// # Safety
/// `out` is null or valid for a pointer write.
unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    let c = CString::new(s).map_err(|_| Failure(SsStatus::InvalidArgument, "output contains a nul byte".into()))?;
    *out = c.into_raw();
    Ok(())
}

fn make_instance(file: InstanceFile) -> Result<*mut SsInstance, Failure> {
    let inst = file.instantiate()?;
    Ok(Box::into_raw(Box::new(SsInstance { file, inst })))
}

/// Message of the most recent failure on this thread, or null if none.
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn ss_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses an instance description in the JSON format written by `substream gen`.
///
/// # Safety
/// `json` is a nul-terminated string and `out` is valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ss_instance_from_json(json: *const c_char, out: *mut *mut SsInstance) -> SsStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        write_out(out, make_instance(InstanceFile::from_json(text)?)?)
    })
}

/// The hard cardinality instance on `n` elements with rank `k` and weight `h`.
///
/// # Safety
/// `out` is valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ss_instance_hard_cardinality(
    n: usize,
    k: usize,
    h: usize,
    seed: u64,
    out: *mut *mut SsInstance,
) -> SsStatus {
    guard(|| write_out(out, make_instance(InstanceFile::hard_cardinality(n, k, h, seed))?))
}

/// The hard partition-matroid instance with rank `k` and block size `m`.
///
/// # Safety
/// `out` is valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ss_instance_hard_matroid(k: usize, m: usize, seed: u64, out: *mut *mut SsInstance) -> SsStatus {
    guard(|| write_out(out, make_instance(InstanceFile::hard_matroid(k, m, seed))?))
}

/// Releases an instance. Null is ignored.
///
/// # Safety
/// `inst` is null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn ss_instance_free(inst: *mut SsInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Number of ground elements, or 0 for a null handle.
///
/// # Safety
/// `inst` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ss_instance_ground_size(inst: *const SsInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.inst.ground_size())
}

/// Exact optimum as a decimal string.
///
/// # Safety
/// `inst` is a live handle and `out` is valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ss_instance_optimum(inst: *const SsInstance, out: *mut *mut c_char) -> SsStatus {
    guard(|| {
        let inst = inst.as_ref().ok_or_else(|| null("inst"))?;
        write_string(out, inst.inst.exact_optimum()?.to_string())
    })
}

/// Runs `trials` independent trials of `algorithm` (`branching`, `greedy`,
/// `sieve` or `store-all`) with accuracy `eps_num/eps_den`. A `budget` of 0
/// means no element budget.
///
/// # Safety
/// `inst` is a live handle, `algorithm` is a nul-terminated string and `out`
/// is valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ss_run_experiment(
    inst: *const SsInstance,
    algorithm: *const c_char,
    eps_num: i64,
    eps_den: i64,
    trials: usize,
    seed: u64,
    budget: usize,
    out: *mut *mut SsReport,
) -> SsStatus {
    guard(|| {
        let inst = inst.as_ref().ok_or_else(|| null("inst"))?;
        let alg = AlgorithmId::parse(read_str(algorithm, "algorithm")?)?;
        if eps_den <= 0 || eps_num <= 0 {
            return Err(Failure(SsStatus::InvalidArgument, "epsilon must be positive".into()));
        }
        let eps = BigRational::new(BigInt::from(eps_num), BigInt::from(eps_den));
        let mut cfg = ExperimentConfig::new(inst.file.clone(), alg, eps, trials)?;
        cfg.seed = seed;
        cfg.budget = (budget > 0).then_some(budget);
        let report = run_experiment(&cfg)?;
        write_out(out, Box::into_raw(Box::new(SsReport { report })))
    })
}

/// Releases a report. Null is ignored.
///
/// # Safety
/// `report` is null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn ss_report_free(report: *mut SsReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Number of trials, or 0 for a null handle.
///
/// # Safety
/// `report` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ss_report_trials(report: *const SsReport) -> usize {
    report.as_ref().map_or(0, |r| r.report.aggregates.trials)
}

/// Trials that ended in an error, or 0 for a null handle.
///
/// # Safety
/// `report` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ss_report_failed(report: *const SsReport) -> usize {
    report.as_ref().map_or(0, |r| r.report.aggregates.failed)
}

/// Mean of value over optimum, or NaN for a null handle.
///
/// # Safety
/// `report` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ss_report_mean_ratio(report: *const SsReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.report.aggregates.mean_ratio)
}

/// Smallest value over optimum, or NaN for a null handle.
///
/// # Safety
/// `report` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ss_report_min_ratio(report: *const SsReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.report.aggregates.min_ratio)
}

/// Queries refused by the access policy over all trials, or 0 for a null handle.
///
/// # Safety
/// `report` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ss_report_violations(report: *const SsReport) -> usize {
    report.as_ref().map_or(0, |r| r.report.aggregates.total_violations)
}

/// Report as pretty-printed JSON.
///
/// # Safety
/// `report` is a live handle and `out` is valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ss_report_json(report: *const SsReport, out: *mut *mut c_char) -> SsStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        write_string(out, r.report.to_json())
    })
}

/// Report aggregates as a two-line CSV.
///
/// # Safety
/// `report` is a live handle and `out` is valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ss_report_csv(report: *const SsReport, out: *mut *mut c_char) -> SsStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        write_string(out, r.report.to_csv())
    })
}

/// Regenerates verification table `which` (2, 3 or 4) as CSV.
///
/// # Safety
/// `out` is valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ss_table_csv(which: u32, out: *mut *mut c_char) -> SsStatus {
    guard(|| write_string(out, emit_table(Table::from_number(which)?)))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` is null or a string from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn ss_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
