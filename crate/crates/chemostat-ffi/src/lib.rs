//! C ABI over the chemostat laboratory.
//!
//! Conventions: every object crosses the boundary as an opaque pointer with
//! a paired `_free` function, every fallible call returns a [`ChemStatus`]
//! and writes its result through an out-pointer, and the most recent failure
//! message on the calling thread is available from
//! [`chem_last_error_message`] until the next failing call. Species and
//! state components are 0-based on this side of the boundary: component 0 is
//! the nutrient, component 1 + i is species i.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use chemostat_lab::conditions::{check_existence, check_extinction, estimate_persistence};
use chemostat_lab::config::load_model;
use chemostat_lab::simulate::{simulate, History, Trajectory};
use chemostat_lab::solver::find_fixed_point;
use chemostat_lab::washout::washout_solution;
use chemostat_lab::{
    ChemostatModel, ConditionReport, PeriodicFn, PeriodicOrbit, PersistenceEstimate, ResponseFn,
    SolveOptions, Species, WashoutSolution,
};

/// Status code for every fallible call. `CHEM_STATUS_OK` is zero so the
/// codes can be tested as booleans from C.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChemStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    Utf8 = 2,
    /// A parameter was out of range (including under-resolved delays).
    InvalidArgument = 3,
    /// The model itself is inconsistent.
    InvalidModel = 4,
    /// An iteration or shooting run exhausted its budget.
    NoConvergence = 5,
    /// The integrator produced a non-finite or otherwise unusable state.
    Numeric = 6,
    /// A configuration file failed to parse or validate.
    Config = 7,
    Io = 8,
    /// An internal panic was caught at the boundary.
    Panic = 9,
}

/// Periodic chemostat model: forcing functions plus a species table.
pub struct ChemModel(ChemostatModel);

/// Periodic washout solution y* of the species-free system.
pub struct ChemWashout(WashoutSolution);

/// Margins and verdicts of every checked condition, plus the persistence
/// floor estimate.
pub struct ChemReport {
    conditions: ConditionReport,
    persistence: PersistenceEstimate,
}

/// Nontrivial periodic orbit (fixed point of the integral operator).
pub struct ChemOrbit(PeriodicOrbit);

/// Dense-output forward simulation record.
pub struct ChemTrajectory(Trajectory);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg)
        .unwrap_or_else(|_| CString::new("error message contained an interior NUL").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(msg));
}

fn fail(status: ChemStatus, msg: impl Into<String>) -> ChemStatus {
    set_last_error(msg.into());
    status
}

fn fail_from(err: chemostat_lab::Error) -> ChemStatus {
    use chemostat_lab::Error::*;
    let status = match &err {
        InvalidArgument(_) | DelayUnderResolved { .. } => ChemStatus::InvalidArgument,
        InvalidModel(_) => ChemStatus::InvalidModel,
        NotConverged { .. } | ConvergedToWashout { .. } | NoPeriodicOrbit { .. } => {
            ChemStatus::NoConvergence
        }
        IntegrationFault { .. } => ChemStatus::Numeric,
        Config(_) => ChemStatus::Config,
        Io(_) => ChemStatus::Io,
    };
    set_last_error(err.to_string());
    status
}

/// Run a body with panics converted to `CHEM_STATUS_PANIC` so unwinding
/// never crosses the C boundary.
fn guarded(body: impl FnOnce() -> ChemStatus) -> ChemStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(ChemStatus::Panic, "internal panic caught at the C boundary"),
    }
}

unsafe fn expect_ref<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, ChemStatus> {
    ptr.as_ref()
        .ok_or_else(|| fail(ChemStatus::NullArgument, format!("{what} is null")))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> ChemStatus {
    if out.is_null() {
        return fail(ChemStatus::NullArgument, format!("{what} out-pointer is null"));
    }
    out.write(value);
    ChemStatus::Ok
}

/// Most recent failure message on this thread, or null if none has been
/// recorded. The pointer stays valid until the next failing call on the
/// same thread; copy it if you need to keep it.
#[no_mangle]
pub extern "C" fn chem_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |msg| msg.as_ptr())
    })
}

/// Free a string returned by this library (currently only report JSON).
///
/// # Safety
/// `s` must have been returned by this library and not freed before.
#[no_mangle]
pub unsafe extern "C" fn chem_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Load a model from a TOML file in the laboratory's config format.
///
/// # Safety
/// `path` must be a NUL-terminated string, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chem_model_from_toml_file(
    path: *const c_char,
    out: *mut *mut ChemModel,
) -> ChemStatus {
    guarded(|| {
        if path.is_null() {
            return fail(ChemStatus::NullArgument, "path is null");
        }
        let path = match CStr::from_ptr(path).to_str() {
            Ok(p) => p,
            Err(_) => return fail(ChemStatus::Utf8, "path is not valid UTF-8"),
        };
        match load_model(Path::new(path)) {
            Ok(model) => write_out(out, Box::into_raw(Box::new(ChemModel(model))), "model"),
            Err(err) => fail_from(err),
        }
    })
}

/// Build a model with sinusoidal forcing and Michaelis-Menten species.
///
/// The dilution rate is `d_offset + d_sin sin(2 pi t / period) + d_cos
/// cos(2 pi t / period)` and the inflow concentration follows the same
/// shape with the `s_` coefficients. Species i has uptake ceiling
/// `uptake_max[i]`, half-saturation `half_saturation[i]` and delay
/// `delays[i]`; all three arrays hold `n_species` values.
///
/// # Safety
/// The three arrays must be readable for `n_species` doubles (they may be
/// null when `n_species` is zero); `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chem_model_new_sinusoid(
    period: f64,
    d_offset: f64,
    d_sin: f64,
    d_cos: f64,
    s_offset: f64,
    s_sin: f64,
    s_cos: f64,
    n_species: usize,
    uptake_max: *const f64,
    half_saturation: *const f64,
    delays: *const f64,
    out: *mut *mut ChemModel,
) -> ChemStatus {
    guarded(|| {
        if n_species > 0 && (uptake_max.is_null() || half_saturation.is_null() || delays.is_null())
        {
            return fail(ChemStatus::NullArgument, "species parameter array is null");
        }
        let build = || -> chemostat_lab::Result<ChemostatModel> {
            let d = PeriodicFn::base_sinusoid(period, d_offset, d_sin, d_cos)?;
            let s0 = PeriodicFn::base_sinusoid(period, s_offset, s_sin, s_cos)?;
            let mut species = Vec::with_capacity(n_species);
            for i in 0..n_species {
                let response =
                    ResponseFn::michaelis_menten(*uptake_max.add(i), *half_saturation.add(i))?;
                species.push(Species::new(response, *delays.add(i))?);
            }
            ChemostatModel::new(period, d, s0, species)
        };
        match build() {
            Ok(model) => write_out(out, Box::into_raw(Box::new(ChemModel(model))), "model"),
            Err(err) => fail_from(err),
        }
    })
}

/// # Safety
/// `model` must come from a model constructor and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn chem_model_free(model: *mut ChemModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of species, or 0 when `model` is null.
///
/// # Safety
/// `model` must be null or a live model handle.
#[no_mangle]
pub unsafe extern "C" fn chem_model_species_count(model: *const ChemModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.n())
}

/// Common period of the forcing functions.
///
/// # Safety
/// Both pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn chem_model_period(model: *const ChemModel, out: *mut f64) -> ChemStatus {
    guarded(|| {
        let model = match expect_ref(model, "model") {
            Ok(m) => m,
            Err(status) => return status,
        };
        write_out(out, model.0.omega, "period")
    })
}

/// Compute the periodic washout solution of the species-free system.
///
/// # Safety
/// `model` must be a live model handle, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chem_washout_solve(
    model: *const ChemModel,
    out: *mut *mut ChemWashout,
) -> ChemStatus {
    guarded(|| {
        let model = match expect_ref(model, "model") {
            Ok(m) => m,
            Err(status) => return status,
        };
        match washout_solution(&model.0) {
            Ok(w) => write_out(out, Box::into_raw(Box::new(ChemWashout(w))), "washout"),
            Err(err) => fail_from(err),
        }
    })
}

/// # Safety
/// `washout` must come from `chem_washout_solve` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn chem_washout_free(washout: *mut ChemWashout) {
    if !washout.is_null() {
        drop(Box::from_raw(washout));
    }
}

/// Washout level y*(t) at any time (the function is periodic).
///
/// # Safety
/// Both pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn chem_washout_eval(
    washout: *const ChemWashout,
    t: f64,
    out: *mut f64,
) -> ChemStatus {
    guarded(|| {
        let washout = match expect_ref(washout, "washout") {
            Ok(w) => w,
            Err(status) => return status,
        };
        write_out(out, washout.0.eval(t), "value")
    })
}

/// Minimum and maximum of y* over one period.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn chem_washout_extrema(
    washout: *const ChemWashout,
    out_min: *mut f64,
    out_max: *mut f64,
) -> ChemStatus {
    guarded(|| {
        let washout = match expect_ref(washout, "washout") {
            Ok(w) => w,
            Err(status) => return status,
        };
        let status = write_out(out_min, washout.0.min, "minimum");
        if status != ChemStatus::Ok {
            return status;
        }
        write_out(out_max, washout.0.max, "maximum")
    })
}

/// Evaluate every condition (extinction, existence, persistence) against
/// the washout solution and collect the margins into one report.
///
/// # Safety
/// All pointers must be valid handles.
#[no_mangle]
pub unsafe extern "C" fn chem_conditions_check(
    model: *const ChemModel,
    washout: *const ChemWashout,
    out: *mut *mut ChemReport,
) -> ChemStatus {
    guarded(|| {
        let model = match expect_ref(model, "model") {
            Ok(m) => m,
            Err(status) => return status,
        };
        let washout = match expect_ref(washout, "washout") {
            Ok(w) => w,
            Err(status) => return status,
        };
        let mut conditions = check_extinction(&model.0, &washout.0);
        conditions.merge(check_existence(&model.0, &washout.0));
        let (persistence, floor_report) = estimate_persistence(&model.0, &washout.0);
        conditions.merge(floor_report);
        let report = ChemReport {
            conditions,
            persistence,
        };
        write_out(out, Box::into_raw(Box::new(report)), "report")
    })
}

/// # Safety
/// `report` must come from `chem_conditions_check` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn chem_report_free(report: *mut ChemReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// True when every checked condition holds.
///
/// # Safety
/// Both pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn chem_report_all_hold(
    report: *const ChemReport,
    out: *mut bool,
) -> ChemStatus {
    guarded(|| {
        let report = match expect_ref(report, "report") {
            Ok(r) => r,
            Err(status) => return status,
        };
        write_out(out, report.conditions.all_hold(), "flag")
    })
}

/// Serialize the full report (conditions with margins and notes, plus the
/// persistence floor) as JSON. Free the string with `chem_string_free`.
///
/// # Safety
/// Both pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn chem_report_json(
    report: *const ChemReport,
    out: *mut *mut c_char,
) -> ChemStatus {
    guarded(|| {
        let report = match expect_ref(report, "report") {
            Ok(r) => r,
            Err(status) => return status,
        };
        let value = serde_json::json!({
            "conditions": report.conditions,
            "persistence": report.persistence,
        });
        let text = match serde_json::to_string_pretty(&value) {
            Ok(t) => t,
            Err(err) => return fail(ChemStatus::Numeric, format!("serialization failed: {err}")),
        };
        let text = match CString::new(text) {
            Ok(t) => t,
            Err(_) => return fail(ChemStatus::Numeric, "JSON contained an interior NUL"),
        };
        write_out(out, text.into_raw(), "json")
    })
}

/// Solve for a nontrivial periodic orbit as a fixed point of the integral
/// operator, with default solver settings. Fails with
/// `CHEM_STATUS_NO_CONVERGENCE` when the iteration collapses to the washout
/// (the expected outcome in the extinction regime).
///
/// # Safety
/// All pointers must be valid handles.
#[no_mangle]
pub unsafe extern "C" fn chem_orbit_solve(
    model: *const ChemModel,
    washout: *const ChemWashout,
    out: *mut *mut ChemOrbit,
) -> ChemStatus {
    guarded(|| {
        let model = match expect_ref(model, "model") {
            Ok(m) => m,
            Err(status) => return status,
        };
        let washout = match expect_ref(washout, "washout") {
            Ok(w) => w,
            Err(status) => return status,
        };
        match find_fixed_point(&model.0, &washout.0, &SolveOptions::default()) {
            Ok(orbit) => write_out(out, Box::into_raw(Box::new(ChemOrbit(orbit))), "orbit"),
            Err(err) => fail_from(err),
        }
    })
}

/// # Safety
/// `orbit` must come from `chem_orbit_solve` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn chem_orbit_free(orbit: *mut ChemOrbit) {
    if !orbit.is_null() {
        drop(Box::from_raw(orbit));
    }
}

/// Operator residual (distance to one more operator application) and
/// differential defect of the orbit.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn chem_orbit_residuals(
    orbit: *const ChemOrbit,
    out_operator: *mut f64,
    out_defect: *mut f64,
) -> ChemStatus {
    guarded(|| {
        let orbit = match expect_ref(orbit, "orbit") {
            Ok(o) => o,
            Err(status) => return status,
        };
        let status = write_out(out_operator, orbit.0.phi_residual, "operator residual");
        if status != ChemStatus::Ok {
            return status;
        }
        write_out(out_defect, orbit.0.fde_residual, "defect")
    })
}

/// Species component x*_i(t) of the orbit (i is 0-based).
///
/// # Safety
/// Both pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn chem_orbit_species_eval(
    orbit: *const ChemOrbit,
    species: usize,
    t: f64,
    out: *mut f64,
) -> ChemStatus {
    guarded(|| {
        let orbit = match expect_ref(orbit, "orbit") {
            Ok(o) => o,
            Err(status) => return status,
        };
        if species >= orbit.0.x_star.components() {
            return fail(
                ChemStatus::InvalidArgument,
                format!(
                    "species index {species} out of range (orbit has {})",
                    orbit.0.x_star.components()
                ),
            );
        }
        write_out(out, orbit.0.x_star.eval(species, t), "value")
    })
}

/// Reconstructed nutrient component S*(t) of the orbit.
///
/// # Safety
/// Both pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn chem_orbit_nutrient_eval(
    orbit: *const ChemOrbit,
    t: f64,
    out: *mut f64,
) -> ChemStatus {
    guarded(|| {
        let orbit = match expect_ref(orbit, "orbit") {
            Ok(o) => o,
            Err(status) => return status,
        };
        write_out(out, orbit.0.s_star.eval(t), "value")
    })
}

/// Integrate the full delay system from a constant history.
///
/// `initial_state` holds `1 + n` doubles: the nutrient level followed by
/// every species level, held constant on the history window.
///
/// # Safety
/// `initial_state` must be readable for `state_len` doubles; the other
/// pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn chem_simulate(
    model: *const ChemModel,
    initial_state: *const f64,
    state_len: usize,
    t_end: f64,
    dt: f64,
    out: *mut *mut ChemTrajectory,
) -> ChemStatus {
    guarded(|| {
        let model = match expect_ref(model, "model") {
            Ok(m) => m,
            Err(status) => return status,
        };
        if initial_state.is_null() {
            return fail(ChemStatus::NullArgument, "initial_state is null");
        }
        if state_len != model.0.n() + 1 {
            return fail(
                ChemStatus::InvalidArgument,
                format!(
                    "initial state holds {state_len} components, model needs {}",
                    model.0.n() + 1
                ),
            );
        }
        let state = std::slice::from_raw_parts(initial_state, state_len).to_vec();
        match simulate(&model.0, &History::constant(state), t_end, dt) {
            Ok(traj) => write_out(out, Box::into_raw(Box::new(ChemTrajectory(traj))), "trajectory"),
            Err(err) => fail_from(err),
        }
    })
}

/// # Safety
/// `trajectory` must come from `chem_simulate` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn chem_trajectory_free(trajectory: *mut ChemTrajectory) {
    if !trajectory.is_null() {
        drop(Box::from_raw(trajectory));
    }
}

/// Dense-output evaluation of one state component (0 is the nutrient,
/// 1 + i is species i) anywhere in [-max delay, t_end].
///
/// # Safety
/// Both pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn chem_trajectory_eval(
    trajectory: *const ChemTrajectory,
    t: f64,
    component: usize,
    out: *mut f64,
) -> ChemStatus {
    guarded(|| {
        let trajectory = match expect_ref(trajectory, "trajectory") {
            Ok(tr) => tr,
            Err(status) => return status,
        };
        if component >= trajectory.0.dim() {
            return fail(
                ChemStatus::InvalidArgument,
                format!(
                    "component {component} out of range (state has {})",
                    trajectory.0.dim()
                ),
            );
        }
        if t > trajectory.0.t_end() {
            return fail(
                ChemStatus::InvalidArgument,
                format!("t = {t} is past the end of the run ({})", trajectory.0.t_end()),
            );
        }
        write_out(out, trajectory.0.eval(t, component), "value")
    })
}

/// Final time of the run.
///
/// # Safety
/// Both pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn chem_trajectory_end_time(
    trajectory: *const ChemTrajectory,
    out: *mut f64,
) -> ChemStatus {
    guarded(|| {
        let trajectory = match expect_ref(trajectory, "trajectory") {
            Ok(tr) => tr,
            Err(status) => return status,
        };
        write_out(out, trajectory.0.t_end(), "end time")
    })
}

/// Most negative raw component the integrator saw before clamping; values
/// at or above -1e-12 are treated as rounding noise and clamped to zero.
///
/// # Safety
/// Both pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn chem_trajectory_min_component(
    trajectory: *const ChemTrajectory,
    out: *mut f64,
) -> ChemStatus {
    guarded(|| {
        let trajectory = match expect_ref(trajectory, "trajectory") {
            Ok(tr) => tr,
            Err(status) => return status,
        };
        write_out(out, trajectory.0.min_component, "minimum component")
    })
}
