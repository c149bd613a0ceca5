//! C ABI over the `qchop` simulator.
//!
//! Every fallible function returns a [`QchopStatus`]; on failure a message is
//! available from [`qchop_last_error_message`] on the same thread. Objects
//! cross the boundary as opaque handles that the caller releases with the
//! matching `*_free` function. Strings returned by the library are released
//! with [`qchop_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qchop::experiment::{run_instance, PreparedInstance, RunSpec, RuntimeSpec};
use qchop::hamiltonians::{RotationPolicy, Variant};
use qchop::metrics::MetricsReport;
use qchop::problems::{generate_instance, parse_instance, ProblemKind};
use qchop::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QchopStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument is out of range or a string is not valid UTF-8.
    InvalidArgument = 2,
    /// Invalid simulation settings.
    Config = 3,
    /// The instance text or data is malformed.
    Malformed = 4,
    /// The instance is valid but unusable for benchmarking.
    Rejected = 5,
    /// The generator kept producing rejected instances.
    Generator = 6,
    /// The integrator failed (step underflow, step budget, norm drift).
    Integration = 7,
    Io = 8,
    /// A precondition of the library was violated.
    Precondition = 9,
    /// The library panicked; the handle arguments should be considered lost.
    Panic = 10,
}

/// Problem families of the built-in generator.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QchopProblemKind {
    Mis = 0,
    Dmds = 1,
    Knapsack = 2,
    Auction = 3,
    Etf = 4,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QchopVariant {
    Qchop = 0,
    QchopCd = 1,
    Saa = 2,
    Yww = 3,
}

/// How [`QchopRunOptions::total_time`] is interpreted.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QchopRuntime {
    /// `T = 2πN`.
    TwoPiN = 0,
    /// `T = 2πN²`.
    TwoPiN2 = 1,
    /// `T = total_time`.
    Fixed = 2,
}

/// Settings of one simulation. Obtain defaults from
/// [`qchop_run_options_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QchopRunOptions {
    /// A [`QchopVariant`].
    pub variant: i32,
    /// A [`QchopRuntime`].
    pub runtime: i32,
    pub total_time: f64,
    /// Penalty factor; `0` selects the number of decision variables.
    pub lambda: f64,
    /// ε of `P_ε`; negative selects the problem family's default.
    pub epsilon: f64,
    pub checkpoints: usize,
    pub atol: f64,
    pub rtol: f64,
    /// Nonzero to apply the slack mixing operator.
    pub mixing: i32,
}

/// Expectations at one checkpoint.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QchopCheckpoint {
    pub t: f64,
    pub r: f64,
    pub p_feas: f64,
    pub p_opt: f64,
    pub p_eps: f64,
}

/// Exact solution of an instance.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QchopOracle {
    pub e_best: f64,
    pub e_worst: f64,
    pub feasible_count: u64,
    pub optimal_count: u64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QchopIntegratorStats {
    pub accepted_steps: u64,
    pub rejected_steps: u64,
    pub evaluations: u64,
    pub max_norm_drift: f64,
}

/// An instance with its exact solution and simulation encoding.
pub struct QchopInstance {
    inner: PreparedInstance,
}

/// Metrics of one finished simulation.
pub struct QchopReport {
    inner: MetricsReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).expect("interior nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

fn status_of(err: &Error) -> QchopStatus {
    match err {
        Error::Config(_) => QchopStatus::Config,
        Error::Malformed(_) | Error::Parse { .. } | Error::Field { .. } => QchopStatus::Malformed,
        Error::InstanceRejected(_) => QchopStatus::Rejected,
        Error::Precondition(_) => QchopStatus::Precondition,
        Error::StepUnderflow { .. } | Error::TooManySteps { .. } | Error::NormDrift { .. } => {
            QchopStatus::Integration
        }
        Error::Generator(_) => QchopStatus::Generator,
        Error::Io(_) => QchopStatus::Io,
    }
}

/// Failure inside a call, before it becomes a status code.
enum Failure {
    Status(QchopStatus, String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure::Status(QchopStatus::InvalidArgument, message.into())
}

fn null(name: &str) -> Failure {
    Failure::Status(QchopStatus::NullPointer, format!("`{name}` is null"))
}

/// Runs `body`, translating errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> QchopStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => QchopStatus::Ok,
        Ok(Err(Failure::Status(status, message))) => {
            set_last_error(&message);
            status
        }
        Ok(Err(Failure::Core(e))) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {message}"));
            QchopStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("`{name}` is not valid UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(name))
}

unsafe fn handle<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(name))
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("interior nul bytes removed").into_raw()
}

/// Message of the last failed call on this thread, or null if none failed
/// yet. Valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn qchop_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Static name of a [`QchopStatus`] value, e.g. `"QCHOP_STATUS_CONFIG"`,
/// or `"QCHOP_STATUS_UNKNOWN"`.
#[no_mangle]
pub extern "C" fn qchop_status_name(status: i32) -> *const c_char {
    let name: &'static CStr = match status {
        0 => c"QCHOP_STATUS_OK",
        1 => c"QCHOP_STATUS_NULL_POINTER",
        2 => c"QCHOP_STATUS_INVALID_ARGUMENT",
        3 => c"QCHOP_STATUS_CONFIG",
        4 => c"QCHOP_STATUS_MALFORMED",
        5 => c"QCHOP_STATUS_REJECTED",
        6 => c"QCHOP_STATUS_GENERATOR",
        7 => c"QCHOP_STATUS_INTEGRATION",
        8 => c"QCHOP_STATUS_IO",
        9 => c"QCHOP_STATUS_PRECONDITION",
        10 => c"QCHOP_STATUS_PANIC",
        _ => c"QCHOP_STATUS_UNKNOWN",
    };
    name.as_ptr()
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn qchop_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn qchop_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

fn kind_of(kind: i32) -> Result<ProblemKind, Failure> {
    Ok(match kind {
        k if k == QchopProblemKind::Mis as i32 => ProblemKind::Mis,
        k if k == QchopProblemKind::Dmds as i32 => ProblemKind::Dmds,
        k if k == QchopProblemKind::Knapsack as i32 => ProblemKind::Knapsack,
        k if k == QchopProblemKind::Auction as i32 => ProblemKind::Auction,
        k if k == QchopProblemKind::Etf as i32 => ProblemKind::Etf,
        _ => return Err(invalid(format!("unknown problem kind {kind}"))),
    })
}

fn variant_of(v: i32) -> Result<Variant, Failure> {
    Ok(match v {
        k if k == QchopVariant::Qchop as i32 => Variant::Qchop,
        k if k == QchopVariant::QchopCd as i32 => Variant::QchopCd,
        k if k == QchopVariant::Saa as i32 => Variant::Saa,
        k if k == QchopVariant::Yww as i32 => Variant::Yww,
        _ => return Err(invalid(format!("unknown variant {v}"))),
    })
}

/// Draws an admitted instance of `kind` (a [`QchopProblemKind`]) from the
/// built-in generator.
///
/// # Safety
/// `out` must be valid for writes. On success `*out` owns a new instance.
#[no_mangle]
pub unsafe extern "C" fn qchop_instance_generate(
    kind: i32,
    n: usize,
    seed: u64,
    out: *mut *mut QchopInstance,
) -> QchopStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let kind = kind_of(kind)?;
        let g = generate_instance(kind, n, seed)?;
        let id = format!("{kind}-n{n}-s{seed}");
        let inner = PreparedInstance::new(id, &g.problem, Some(seed))?;
        *out = Box::into_raw(Box::new(QchopInstance { inner }));
        Ok(())
    })
}

/// Parses an instance from its JSON description.
///
/// # Safety
/// `json` and `id` must be nul-terminated strings (`id` may be null);
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qchop_instance_from_json(
    json: *const c_char,
    id: *const c_char,
    out: *mut *mut QchopInstance,
) -> QchopStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let json = str_arg(json, "json")?;
        let id = if id.is_null() { "instance" } else { str_arg(id, "id")? };
        let problem = parse_instance(json)?;
        let inner = PreparedInstance::new(id, &problem, None)?;
        *out = Box::into_raw(Box::new(QchopInstance { inner }));
        Ok(())
    })
}

/// Releases an instance. Null is ignored.
///
/// # Safety
/// `instance` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn qchop_instance_free(instance: *mut QchopInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}

/// Writes the instance's JSON description into `*out`; free it with
/// [`qchop_string_free`].
///
/// # Safety
/// `instance` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qchop_instance_to_json(
    instance: *const QchopInstance,
    out: *mut *mut c_char,
) -> QchopStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let instance = handle(instance, "instance")?;
        let source = instance
            .inner
            .encoded
            .problem()
            .source()
            .ok_or_else(|| Failure::Status(QchopStatus::Precondition, "instance has no description".into()))?;
        *out = owned_string(source.to_json());
        Ok(())
    })
}

/// Number of decision variables, or 0 for a null handle.
///
/// # Safety
/// `instance` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qchop_instance_num_vars(instance: *const QchopInstance) -> usize {
    instance.as_ref().map_or(0, |i| i.inner.n())
}

/// Dimension of the simulated space (qubits and slack qudits), or 0 for a
/// null handle.
///
/// # Safety
/// `instance` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qchop_instance_dimension(instance: *const QchopInstance) -> usize {
    instance.as_ref().map_or(0, |i| i.inner.encoded.space().dim())
}

/// The instance's exact solution.
///
/// # Safety
/// `instance` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qchop_instance_oracle(
    instance: *const QchopInstance,
    out: *mut QchopOracle,
) -> QchopStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let o = &handle(instance, "instance")?.inner.oracle;
        *out = QchopOracle {
            e_best: o.e_best,
            e_worst: o.e_worst,
            feasible_count: o.feasible.len() as u64,
            optimal_count: o.best.len() as u64,
        };
        Ok(())
    })
}

/// Default settings: Q-CHOP, `T = 2πN²`, `λ = N`, family default ε, 101
/// checkpoints, tolerances `1e-8`, mixing on.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qchop_run_options_default(out: *mut QchopRunOptions) -> QchopStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let d = RunSpec::new(Variant::Qchop, RuntimeSpec::TwoPiN2);
        *out = QchopRunOptions {
            variant: QchopVariant::Qchop as i32,
            runtime: QchopRuntime::TwoPiN2 as i32,
            total_time: 0.0,
            lambda: 0.0,
            epsilon: -1.0,
            checkpoints: d.checkpoints,
            atol: d.atol,
            rtol: d.rtol,
            mixing: 1,
        };
        Ok(())
    })
}

fn run_spec(o: &QchopRunOptions) -> Result<RunSpec, Failure> {
    let runtime = match o.runtime {
        r if r == QchopRuntime::TwoPiN as i32 => RuntimeSpec::TwoPiN,
        r if r == QchopRuntime::TwoPiN2 as i32 => RuntimeSpec::TwoPiN2,
        r if r == QchopRuntime::Fixed as i32 => {
            if !(o.total_time > 0.0 && o.total_time.is_finite()) {
                return Err(invalid(format!("total time must be positive, got {}", o.total_time)));
            }
            RuntimeSpec::Fixed(o.total_time)
        }
        r => return Err(invalid(format!("unknown runtime mode {r}"))),
    };
    let mut spec = RunSpec::new(variant_of(o.variant)?, runtime);
    spec.lambda = (o.lambda != 0.0).then_some(o.lambda);
    spec.epsilon = (o.epsilon >= 0.0).then_some(o.epsilon);
    spec.checkpoints = o.checkpoints;
    spec.atol = o.atol;
    spec.rtol = o.rtol;
    spec.mixing = o.mixing != 0;
    spec.policy = RotationPolicy::Auto;
    Ok(spec)
}

/// Simulates `instance` with `options` (null selects the defaults).
///
/// # Safety
/// `instance` must be a live handle, `options` null or valid, `out` valid
/// for writes. On success `*out` owns a new report.
#[no_mangle]
pub unsafe extern "C" fn qchop_run(
    instance: *const QchopInstance,
    options: *const QchopRunOptions,
    out: *mut *mut QchopReport,
) -> QchopStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let instance = handle(instance, "instance")?;
        let spec = match options.as_ref() {
            Some(o) => run_spec(o)?,
            None => RunSpec::new(Variant::Qchop, RuntimeSpec::TwoPiN2),
        };
        let inner = run_instance(&instance.inner, &spec)?;
        *out = Box::into_raw(Box::new(QchopReport { inner }));
        Ok(())
    })
}

/// Releases a report. Null is ignored.
///
/// # Safety
/// `report` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn qchop_report_free(report: *mut QchopReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Number of checkpoints, or 0 for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qchop_report_len(report: *const QchopReport) -> usize {
    report.as_ref().map_or(0, |r| r.inner.checkpoints.len())
}

/// Checkpoint `index`, in time order.
///
/// # Safety
/// `report` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qchop_report_checkpoint(
    report: *const QchopReport,
    index: usize,
    out: *mut QchopCheckpoint,
) -> QchopStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let report = handle(report, "report")?;
        let c = report.inner.checkpoints.get(index).ok_or_else(|| {
            invalid(format!(
                "checkpoint {index} out of range ({} checkpoints)",
                report.inner.checkpoints.len()
            ))
        })?;
        *out = QchopCheckpoint {
            t: c.t,
            r: c.r,
            p_feas: c.p_feas,
            p_opt: c.p_opt,
            p_eps: c.p_eps,
        };
        Ok(())
    })
}

/// Penalty factor and total time the run used.
///
/// # Safety
/// `report` must be a live handle; both outputs must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qchop_report_parameters(
    report: *const QchopReport,
    lambda: *mut f64,
    total_time: *mut f64,
) -> QchopStatus {
    guard(|| {
        let meta = &handle(report, "report")?.inner.metadata;
        *out_arg(lambda, "lambda")? = meta.lambda;
        *out_arg(total_time, "total_time")? = meta.total_time;
        Ok(())
    })
}

/// Integrator statistics of the run.
///
/// # Safety
/// `report` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qchop_report_stats(
    report: *const QchopReport,
    out: *mut QchopIntegratorStats,
) -> QchopStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let s = &handle(report, "report")?.inner.integrator;
        *out = QchopIntegratorStats {
            accepted_steps: s.accepted_steps as u64,
            rejected_steps: s.rejected_steps as u64,
            evaluations: s.evaluations as u64,
            max_norm_drift: s.max_norm_drift,
        };
        Ok(())
    })
}

/// The whole report as JSON; free it with [`qchop_string_free`].
///
/// # Safety
/// `report` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qchop_report_to_json(report: *const QchopReport, out: *mut *mut c_char) -> QchopStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let report = handle(report, "report")?;
        let json = serde_json::to_string_pretty(&report.inner).expect("reports always serialize");
        *out = owned_string(json);
        Ok(())
    })
}
