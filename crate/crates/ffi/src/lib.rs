//! C ABI for skewlab.
//!
//! Every function returns a [`SkewlabStatus`]; results come back through
//! out-pointers. Objects are opaque handles released with their `_free`
//! function. The message of the last failing call on the current thread is
//! available from [`skewlab_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use skewlab::lab::config::ReactionSpec;
use skewlab::lab::scenario::initial_profile;
use skewlab::lab::{self, ExperimentConfig, RunReport};
use skewlab::profile::{sup_distance, Profile};
use skewlab::quasi_periodic::TorusPhase;
use skewlab::semiflow::{IntegratorConfig, Problem, SkewState, Stepper};
use skewlab::verify::Outcome;
use skewlab::LabError;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkewlabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    GridMismatch = 3,
    DimensionMismatch = 4,
    Config = 5,
    Io = 6,
    Numerical = 7,
    Hypothesis = 8,
    Panic = 9,
}

/// Outcome of a verifier, mirroring the report's outcome field.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkewlabOutcome {
    Pass = 0,
    Fail = 1,
    HypothesisUnmet = 2,
    Error = 3,
}

/// A parsed experiment configuration.
pub struct SkewlabConfig {
    inner: ExperimentConfig,
}

/// The report of a finished run.
pub struct SkewlabReport {
    inner: RunReport,
}

/// A state advanced step by step under a configuration's problem.
pub struct SkewlabSimulation {
    problem: Problem,
    config: IntegratorConfig,
    state: SkewState,
}

/// A profile on a grid.
pub struct SkewlabProfile {
    inner: Profile,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &LabError) -> SkewlabStatus {
    use LabError::*;
    match e {
        GridMismatch => SkewlabStatus::GridMismatch,
        DimensionMismatch { .. } => SkewlabStatus::DimensionMismatch,
        GroupMismatch | InvalidArgument(_) => SkewlabStatus::InvalidArgument,
        ConfigInvalid(_) => SkewlabStatus::Config,
        Io(_) | Format(_) => SkewlabStatus::Io,
        EmptyReturnSet
        | CflViolation(_)
        | NonFiniteState { .. }
        | NoCrossing { .. }
        | Undecided
        | BracketFailure { .. }
        | NoConvergence { .. } => SkewlabStatus::Numerical,
        NotStable { .. } | SymmetryFlagMissing(_) | HypothesisViolated(_) | TrappingViolated(_) => {
            SkewlabStatus::Hypothesis
        }
    }
}

struct Fail(SkewlabStatus, String);

impl From<LabError> for Fail {
    fn from(e: LabError) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(SkewlabStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, recording failures and converting panics.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SkewlabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SkewlabStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            SkewlabStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(SkewlabStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn obj<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn obj_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message of the last failing call on this thread, or null. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn skewlab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn skewlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn skewlab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses and validates a JSON configuration.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn skewlab_config_parse(json: *const c_char, out: *mut *mut SkewlabConfig) -> SkewlabStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        let inner = lab::parse_config(text)?;
        lab::validate_config(&inner)?;
        put(out, SkewlabConfig { inner })
    })
}

/// Loads and validates a configuration file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn skewlab_config_load(path: *const c_char, out: *mut *mut SkewlabConfig) -> SkewlabStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let inner = lab::load_config(Path::new(path))?;
        lab::validate_config(&inner)?;
        put(out, SkewlabConfig { inner })
    })
}

/// # Safety
/// `cfg` must be null or a handle from `skewlab_config_parse`/`_load`.
#[no_mangle]
pub unsafe extern "C" fn skewlab_config_free(cfg: *mut SkewlabConfig) {
    free(cfg)
}

/// Runs an experiment. With a non-null `out_dir` the report, trajectory
/// and plot data are written there as by the command-line runner.
///
/// # Safety
/// `cfg` must be a live config handle; `out_dir` null or a NUL-terminated
/// string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn skewlab_run(
    cfg: *const SkewlabConfig,
    out_dir: *const c_char,
    out: *mut *mut SkewlabReport,
) -> SkewlabStatus {
    guard(|| {
        let cfg = &obj(cfg, "cfg")?.inner;
        let inner = if out_dir.is_null() {
            lab::execute(cfg)?.0
        } else {
            lab::run(cfg, Some(Path::new(str_arg(out_dir, "out_dir")?)))?
        };
        put(out, SkewlabReport { inner })
    })
}

/// # Safety
/// `report` must be null or a handle from `skewlab_run`.
#[no_mangle]
pub unsafe extern "C" fn skewlab_report_free(report: *mut SkewlabReport) {
    free(report)
}

/// Process exit code the command-line runner would use for this report.
///
/// # Safety
/// `report` must be a live report handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn skewlab_report_exit_code(report: *const SkewlabReport, out: *mut i32) -> SkewlabStatus {
    guard(|| {
        let r = obj(report, "report")?;
        *obj_mut(out, "out")? = r.inner.exit_code();
        Ok(())
    })
}

/// The report as JSON; free the string with `skewlab_string_free`.
///
/// # Safety
/// `report` must be a live report handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn skewlab_report_json(report: *const SkewlabReport, out: *mut *mut c_char) -> SkewlabStatus {
    guard(|| {
        let r = obj(report, "report")?;
        let text = serde_json::to_string(&r.inner).map_err(|e| Fail(SkewlabStatus::Io, e.to_string()))?;
        let c = CString::new(text).map_err(|e| Fail(SkewlabStatus::Io, e.to_string()))?;
        *obj_mut(out, "out")? = c.into_raw();
        Ok(())
    })
}

/// Outcome and measured value of the named verifier. `measured` is NaN
/// when the verifier produced no measurement.
///
/// # Safety
/// `report` must be a live report handle, `name` a NUL-terminated string,
/// `outcome` and `measured` writable.
#[no_mangle]
pub unsafe extern "C" fn skewlab_report_verifier(
    report: *const SkewlabReport,
    name: *const c_char,
    outcome: *mut SkewlabOutcome,
    measured: *mut f64,
) -> SkewlabStatus {
    guard(|| {
        let r = obj(report, "report")?;
        let name = str_arg(name, "name")?;
        let v = r.inner.verifier(name).ok_or_else(|| {
            Fail(
                SkewlabStatus::InvalidArgument,
                format!("no verifier named {name:?} in the report"),
            )
        })?;
        *obj_mut(outcome, "outcome")? = match v.outcome {
            Outcome::Pass => SkewlabOutcome::Pass,
            Outcome::Fail => SkewlabOutcome::Fail,
            Outcome::HypothesisUnmet => SkewlabOutcome::HypothesisUnmet,
            Outcome::Error => SkewlabOutcome::Error,
        };
        *obj_mut(measured, "measured")? = v.measured.unwrap_or(f64::NAN);
        Ok(())
    })
}

/// Sets up the configured problem at its initial datum, time zero.
///
/// # Safety
/// `cfg` must be a live config handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn skewlab_simulation_new(
    cfg: *const SkewlabConfig,
    out: *mut *mut SkewlabSimulation,
) -> SkewlabStatus {
    guard(|| {
        let cfg = &obj(cfg, "cfg")?.inner;
        let setup = lab::validate_config(cfg)?;
        let a_mean = match &cfg.reaction {
            ReactionSpec::Bistable { a } => Some(a.build(&setup.basis)?.mean()),
            _ => None,
        };
        let u0 = initial_profile(&cfg.initial, &setup.problem.grid, cfg.seed, a_mean)?;
        let state = SkewState::new(u0, TorusPhase::zero(setup.basis.dim()));
        put(
            out,
            SkewlabSimulation {
                problem: setup.problem,
                config: setup.integrator,
                state,
            },
        )
    })
}

/// # Safety
/// `sim` must be null or a handle from `skewlab_simulation_new`.
#[no_mangle]
pub unsafe extern "C" fn skewlab_simulation_free(sim: *mut SkewlabSimulation) {
    free(sim)
}

/// Advances the state by `steps` time steps.
///
/// # Safety
/// `sim` must be a live simulation handle.
#[no_mangle]
pub unsafe extern "C" fn skewlab_simulation_advance(sim: *mut SkewlabSimulation, steps: usize) -> SkewlabStatus {
    guard(|| {
        let sim = obj_mut(sim, "sim")?;
        let mut stepper = Stepper::new(&sim.problem, sim.config)?;
        stepper.advance(&mut sim.state, steps)?;
        Ok(())
    })
}

/// Current time and step size.
///
/// # Safety
/// `sim` must be a live simulation handle; `time` and `dt` writable.
#[no_mangle]
pub unsafe extern "C" fn skewlab_simulation_time(
    sim: *const SkewlabSimulation,
    time: *mut f64,
    dt: *mut f64,
) -> SkewlabStatus {
    guard(|| {
        let sim = obj(sim, "sim")?;
        *obj_mut(time, "time")? = sim.state.time;
        *obj_mut(dt, "dt")? = sim.config.dt;
        Ok(())
    })
}

/// Number of grid nodes.
///
/// # Safety
/// `sim` must be a live simulation handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn skewlab_simulation_len(sim: *const SkewlabSimulation, out: *mut usize) -> SkewlabStatus {
    guard(|| {
        *obj_mut(out, "out")? = obj(sim, "sim")?.state.profile.values().len();
        Ok(())
    })
}

/// Copies the current profile (row-major in 2-D) into `buf`, which must
/// hold exactly `len` values.
///
/// # Safety
/// `sim` must be a live simulation handle; `buf` must point to `len`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn skewlab_simulation_values(
    sim: *const SkewlabSimulation,
    buf: *mut f64,
    len: usize,
) -> SkewlabStatus {
    guard(|| {
        let v = obj(sim, "sim")?.state.profile.values();
        if buf.is_null() {
            return Err(null("buf"));
        }
        if len != v.len() {
            return Err(Fail(
                SkewlabStatus::GridMismatch,
                format!("buffer holds {len} values, grid has {}", v.len()),
            ));
        }
        std::slice::from_raw_parts_mut(buf, len).copy_from_slice(v);
        Ok(())
    })
}

/// Replaces the current profile; the time and phase are kept.
///
/// # Safety
/// `sim` must be a live simulation handle; `values` must point to `len`
/// readable doubles.
#[no_mangle]
pub unsafe extern "C" fn skewlab_simulation_set_values(
    sim: *mut SkewlabSimulation,
    values: *const f64,
    len: usize,
) -> SkewlabStatus {
    guard(|| {
        let sim = obj_mut(sim, "sim")?;
        if values.is_null() {
            return Err(null("values"));
        }
        let grid = sim.state.profile.grid().clone();
        if len != grid.len() {
            return Err(Fail(
                SkewlabStatus::GridMismatch,
                format!("{len} values for a grid of {}", grid.len()),
            ));
        }
        sim.state.profile = Profile::new(grid, std::slice::from_raw_parts(values, len).to_vec())?;
        Ok(())
    })
}

/// Snapshot of the current profile as an independent handle.
///
/// # Safety
/// `sim` must be a live simulation handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn skewlab_simulation_profile(
    sim: *const SkewlabSimulation,
    out: *mut *mut SkewlabProfile,
) -> SkewlabStatus {
    guard(|| {
        let inner = obj(sim, "sim")?.state.profile.clone();
        put(out, SkewlabProfile { inner })
    })
}

/// # Safety
/// `p` must be null or a handle from `skewlab_simulation_profile`.
#[no_mangle]
pub unsafe extern "C" fn skewlab_profile_free(p: *mut SkewlabProfile) {
    free(p)
}

/// Sup-norm distance between two profiles on the same grid.
///
/// # Safety
/// `a` and `b` must be live profile handles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn skewlab_profile_distance(
    a: *const SkewlabProfile,
    b: *const SkewlabProfile,
    out: *mut f64,
) -> SkewlabStatus {
    guard(|| {
        let d = sup_distance(&obj(a, "a")?.inner, &obj(b, "b")?.inner)?;
        *obj_mut(out, "out")? = d;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_error_has_a_status() {
        assert_eq!(status_of(&LabError::GridMismatch), SkewlabStatus::GridMismatch);
        assert_eq!(status_of(&LabError::Undecided), SkewlabStatus::Numerical);
        assert_eq!(status_of(&LabError::ConfigInvalid(vec![])), SkewlabStatus::Config);
    }

    #[test]
    fn panics_become_status() {
        let s = guard(|| panic!("boom"));
        assert_eq!(s, SkewlabStatus::Panic);
        let msg = unsafe { CStr::from_ptr(skewlab_last_error()) }.to_str().unwrap();
        assert_eq!(msg, "panic: boom");
    }
}
