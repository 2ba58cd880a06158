//! C ABI over the advdyn simulation library.
//!
//! Trajectories are opaque handles created by [`advdyn_simulate`] and
//! released with [`advdyn_trajectory_free`]; everything else crosses the
//! boundary as plain C structs. Functions return [`AdvdynStatus`] codes
//! aligned with the command-line tool: 2 for invalid input, 3 for numeric
//! failure.

use advdyn::analysis::{classify_outcome, OutcomeKind};
use advdyn::core::{ModelParams, PopulationState, SmoothStepParams};
use advdyn::integrator::{IntegratorConfig, Side, Termination, Trajectory};
use advdyn::models::Model;
use advdyn::theory;
use std::ffi::{c_char, CStr};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdvdynStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NumericFailure = 3,
    IoError = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdvdynModel {
    Supporter = 0,
    Contributor = 1,
    ReducedSupporter = 2,
    ReducedContributor = 3,
}

impl From<AdvdynModel> for Model {
    fn from(m: AdvdynModel) -> Self {
        match m {
            AdvdynModel::Supporter => Model::Supporter,
            AdvdynModel::Contributor => Model::Contributor,
            AdvdynModel::ReducedSupporter => Model::ReducedSupporter,
            AdvdynModel::ReducedContributor => Model::ReducedContributor,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdvdynTermination {
    ReachedEnd = 0,
    ExtinctionBlue = 1,
    ExtinctionRed = 2,
    Diverged = 3,
    StepFailure = 4,
}

impl From<Termination> for AdvdynTermination {
    fn from(t: Termination) -> Self {
        match t {
            Termination::ReachedEnd => AdvdynTermination::ReachedEnd,
            Termination::Extinction(Side::Blue) => AdvdynTermination::ExtinctionBlue,
            Termination::Extinction(Side::Red) => AdvdynTermination::ExtinctionRed,
            Termination::Diverged => AdvdynTermination::Diverged,
            Termination::StepFailure => AdvdynTermination::StepFailure,
        }
    }
}

/// Final outcome classification of a trajectory.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdvdynOutcome {
    BlueVictory = 0,
    RedVictory = 1,
    Draw = 2,
    /// The trajectory diverged or failed; no outcome is defined.
    Undefined = 3,
}

/// Model coefficients; the step parameters shape the smooth extinction
/// cutoff.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AdvdynParams {
    pub lethality_red: f64,
    pub lethality_blue: f64,
    pub transfer_blue: f64,
    pub transfer_red: f64,
    pub capacity_red: f64,
    pub capacity_blue: f64,
    pub standing_population: f64,
    pub step_steepness: f64,
    pub step_extinction_offset_scale: f64,
}

impl From<&AdvdynParams> for ModelParams {
    fn from(p: &AdvdynParams) -> Self {
        ModelParams {
            lethality_red: p.lethality_red,
            lethality_blue: p.lethality_blue,
            transfer_blue: p.transfer_blue,
            transfer_red: p.transfer_red,
            capacity_red: p.capacity_red,
            capacity_blue: p.capacity_blue,
            standing_population: p.standing_population,
            step: SmoothStepParams {
                steepness: p.step_steepness,
                extinction_offset_scale: p.step_extinction_offset_scale,
            },
        }
    }
}

/// The five populations at one instant.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AdvdynState {
    pub blue: f64,
    pub red: f64,
    pub red_supporters: f64,
    pub blue_supporters: f64,
    pub neutral: f64,
}

impl From<&AdvdynState> for PopulationState {
    fn from(s: &AdvdynState) -> Self {
        PopulationState::new(s.blue, s.red, s.red_supporters, s.blue_supporters, s.neutral)
    }
}

impl From<&PopulationState> for AdvdynState {
    fn from(s: &PopulationState) -> Self {
        AdvdynState {
            blue: s.blue,
            red: s.red,
            red_supporters: s.red_supporters,
            blue_supporters: s.blue_supporters,
            neutral: s.neutral,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AdvdynIntegratorOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub t_end: f64,
    pub max_step: f64,
    pub sample_interval: f64,
    pub stop_on_extinction: bool,
    /// Threshold used when `stop_on_extinction` is set.
    pub extinction_threshold: f64,
}

impl From<&AdvdynIntegratorOptions> for IntegratorConfig {
    fn from(o: &AdvdynIntegratorOptions) -> Self {
        IntegratorConfig {
            rel_tol: o.rel_tol,
            abs_tol: o.abs_tol,
            t_end: o.t_end,
            max_step: o.max_step,
            sample_interval: o.sample_interval,
            stop_on_extinction: o.stop_on_extinction,
        }
    }
}

/// Closed-form predictor bundle. Values whose derivation assumptions fail
/// at the inputs carry `false` in the matching `_valid` flag.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AdvdynPrediction {
    pub rho: f64,
    pub threshold_exact: f64,
    pub threshold_approx: f64,
    pub threshold_approx_valid: bool,
    pub stalemate_timescale: f64,
    pub oscillatory: bool,
    pub period: f64,
    pub period_valid: bool,
    pub count: f64,
    pub count_valid: bool,
}

/// Opaque dense-sampled trajectory handle.
pub struct AdvdynTrajectory {
    inner: Trajectory<5>,
}

/// Default model parameters: unit rates, unit capacities, and the steep
/// smooth step.
#[no_mangle]
pub extern "C" fn advdyn_params_default() -> AdvdynParams {
    let p = ModelParams::default();
    AdvdynParams {
        lethality_red: p.lethality_red,
        lethality_blue: p.lethality_blue,
        transfer_blue: p.transfer_blue,
        transfer_red: p.transfer_red,
        capacity_red: p.capacity_red,
        capacity_blue: p.capacity_blue,
        standing_population: p.standing_population,
        step_steepness: p.step.steepness,
        step_extinction_offset_scale: p.step.extinction_offset_scale,
    }
}

/// Default integration settings: tolerances 1e-6/1e-8, horizon 50,
/// samples every 0.01.
#[no_mangle]
pub extern "C" fn advdyn_integrator_defaults() -> AdvdynIntegratorOptions {
    let c = IntegratorConfig::default();
    AdvdynIntegratorOptions {
        rel_tol: c.rel_tol,
        abs_tol: c.abs_tol,
        t_end: c.t_end,
        max_step: c.max_step,
        sample_interval: c.sample_interval,
        stop_on_extinction: c.stop_on_extinction,
        extinction_threshold: 1e-3,
    }
}

/// Integrate one trajectory. On success `*out` owns a handle that must be
/// released with [`advdyn_trajectory_free`]. Runs that end in divergence or
/// step failure return `ADVDYN_STATUS_NUMERIC_FAILURE` but still hand out
/// the partial trajectory.
///
/// # Safety
/// `params`, `initial`, `options` and `out` must be valid pointers; `out`
/// must point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn advdyn_simulate(
    model: AdvdynModel,
    params: *const AdvdynParams,
    initial: *const AdvdynState,
    options: *const AdvdynIntegratorOptions,
    out: *mut *mut AdvdynTrajectory,
) -> AdvdynStatus {
    if params.is_null() || initial.is_null() || options.is_null() || out.is_null() {
        return AdvdynStatus::NullPointer;
    }
    unsafe { *out = std::ptr::null_mut() };
    let (params, initial, options) = unsafe { (&*params, &*initial, &*options) };

    let model_params = ModelParams::from(params);
    let state = PopulationState::from(initial);
    if model_params.validate().is_err() || state.validate().is_err() {
        return AdvdynStatus::InvalidArgument;
    }
    let config = IntegratorConfig::from(options);

    match Model::from(model).run(&model_params, &state, &config, options.extinction_threshold) {
        Ok(traj) => {
            let failed =
                matches!(traj.termination, Termination::Diverged | Termination::StepFailure);
            unsafe { *out = Box::into_raw(Box::new(AdvdynTrajectory { inner: traj })) };
            if failed {
                AdvdynStatus::NumericFailure
            } else {
                AdvdynStatus::Ok
            }
        }
        Err(_) => AdvdynStatus::InvalidArgument,
    }
}

/// Number of dense samples in the trajectory (zero for a null handle).
///
/// # Safety
/// `traj` must be null or a live handle from [`advdyn_simulate`].
#[no_mangle]
pub unsafe extern "C" fn advdyn_trajectory_len(traj: *const AdvdynTrajectory) -> usize {
    if traj.is_null() {
        return 0;
    }
    unsafe { &*traj }.inner.len()
}

/// Fetch sample `index` into `time_out` and `state_out`.
///
/// # Safety
/// `traj` must be a live handle; the out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn advdyn_trajectory_sample(
    traj: *const AdvdynTrajectory,
    index: usize,
    time_out: *mut f64,
    state_out: *mut AdvdynState,
) -> AdvdynStatus {
    if traj.is_null() || time_out.is_null() || state_out.is_null() {
        return AdvdynStatus::NullPointer;
    }
    let inner = &unsafe { &*traj }.inner;
    if index >= inner.len() {
        return AdvdynStatus::InvalidArgument;
    }
    unsafe {
        *time_out = inner.times[index];
        *state_out = AdvdynState::from(&PopulationState::from_array(&inner.states[index]));
    }
    AdvdynStatus::Ok
}

/// Why the run ended.
///
/// # Safety
/// `traj` must be null or a live handle; null reports a step failure.
#[no_mangle]
pub unsafe extern "C" fn advdyn_trajectory_termination(
    traj: *const AdvdynTrajectory,
) -> AdvdynTermination {
    if traj.is_null() {
        return AdvdynTermination::StepFailure;
    }
    AdvdynTermination::from(unsafe { &*traj }.inner.termination)
}

/// Classify the final state: victory margins within `draw_threshold` count
/// as a draw. Failed runs report `ADVDYN_OUTCOME_UNDEFINED`.
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn advdyn_trajectory_outcome(
    traj: *const AdvdynTrajectory,
    draw_threshold: f64,
) -> AdvdynOutcome {
    if traj.is_null() {
        return AdvdynOutcome::Undefined;
    }
    match classify_outcome(&unsafe { &*traj }.inner, draw_threshold) {
        Ok(outcome) => match outcome.kind {
            OutcomeKind::BlueVictory => AdvdynOutcome::BlueVictory,
            OutcomeKind::RedVictory => AdvdynOutcome::RedVictory,
            OutcomeKind::Draw => AdvdynOutcome::Draw,
        },
        Err(_) => AdvdynOutcome::Undefined,
    }
}

/// Write the trajectory as CSV (`t,B,R,g,gamma,Gamma,G_total`) to `path`.
///
/// # Safety
/// `traj` must be a live handle and `path` a NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn advdyn_trajectory_write_csv(
    traj: *const AdvdynTrajectory,
    path: *const c_char,
) -> AdvdynStatus {
    if traj.is_null() || path.is_null() {
        return AdvdynStatus::NullPointer;
    }
    let Ok(path) = unsafe { CStr::from_ptr(path) }.to_str() else {
        return AdvdynStatus::InvalidArgument;
    };
    let inner = &unsafe { &*traj }.inner;
    let mut buffer = Vec::new();
    if inner.write_population_csv(&mut buffer).is_err() {
        return AdvdynStatus::IoError;
    }
    match std::fs::write(path, buffer) {
        Ok(()) => AdvdynStatus::Ok,
        Err(_) => AdvdynStatus::IoError,
    }
}

/// Release a trajectory handle. Null is a no-op.
///
/// # Safety
/// `traj` must be null or a handle from [`advdyn_simulate`] that has not
/// been freed already.
#[no_mangle]
pub unsafe extern "C" fn advdyn_trajectory_free(traj: *mut AdvdynTrajectory) {
    if !traj.is_null() {
        drop(unsafe { Box::from_raw(traj) });
    }
}

/// Evaluate every closed-form predictor at the given parameters and initial
/// state. Requires the supporter-analytics domain
/// `total green > 2 * red_supporters > 0`.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn advdyn_predict(
    params: *const AdvdynParams,
    initial: *const AdvdynState,
    out: *mut AdvdynPrediction,
) -> AdvdynStatus {
    if params.is_null() || initial.is_null() || out.is_null() {
        return AdvdynStatus::NullPointer;
    }
    let (params, initial) = unsafe { (&*params, &*initial) };
    let state = PopulationState::from(initial);
    let total_green0 = state.total_green();

    let Ok(rho) = theory::rho(params.lethality_red, total_green0, state.red_supporters) else {
        return AdvdynStatus::InvalidArgument;
    };
    let Ok(threshold_exact) = theory::annihilation_threshold(
        state.blue,
        params.lethality_red,
        total_green0,
        state.red_supporters,
    ) else {
        return AdvdynStatus::InvalidArgument;
    };
    let Ok(threshold_approx) = theory::annihilation_threshold_approx(
        state.blue,
        params.lethality_red,
        total_green0,
        state.red_supporters,
    ) else {
        return AdvdynStatus::InvalidArgument;
    };
    let period = theory::oscillation_period(params.transfer_blue, params.capacity_red, state.neutral);
    let count = theory::oscillation_count(
        state.red_supporters,
        state.neutral,
        params.transfer_blue,
        params.capacity_red,
    );

    unsafe {
        *out = AdvdynPrediction {
            rho,
            threshold_exact,
            threshold_approx: threshold_approx.value,
            threshold_approx_valid: threshold_approx.valid,
            stalemate_timescale: theory::stalemate_timescale(
                state.red_supporters,
                state.neutral,
                params.capacity_red,
            ),
            oscillatory: theory::oscillation_condition(
                params.transfer_blue,
                params.capacity_red,
                state.neutral,
            ),
            period: period.value,
            period_valid: period.valid,
            count: count.value,
            count_valid: count.valid,
        };
    }
    AdvdynStatus::Ok
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn advdyn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;

    fn stalemate_state() -> AdvdynState {
        AdvdynState { blue: 1.0, red: 1.0, red_supporters: 3.0, blue_supporters: 3.0, neutral: 20.0 }
    }

    #[test]
    fn simulate_sample_and_free() {
        let params = advdyn_params_default();
        let mut options = advdyn_integrator_defaults();
        options.t_end = 5.0;
        let initial = stalemate_state();
        let mut handle: *mut AdvdynTrajectory = std::ptr::null_mut();
        let status = unsafe {
            advdyn_simulate(AdvdynModel::ReducedContributor, &params, &initial, &options, &mut handle)
        };
        assert_eq!(status, AdvdynStatus::Ok);
        assert!(!handle.is_null());

        let len = unsafe { advdyn_trajectory_len(handle) };
        assert_eq!(len, 501);
        assert_eq!(
            unsafe { advdyn_trajectory_termination(handle) },
            AdvdynTermination::ReachedEnd
        );

        let mut time = f64::NAN;
        let mut state = stalemate_state();
        let status = unsafe { advdyn_trajectory_sample(handle, 0, &mut time, &mut state) };
        assert_eq!(status, AdvdynStatus::Ok);
        assert_eq!(time, 0.0);
        assert_eq!(state.blue, 1.0);
        assert_eq!(state.neutral, 20.0);

        let status = unsafe { advdyn_trajectory_sample(handle, len, &mut time, &mut state) };
        assert_eq!(status, AdvdynStatus::InvalidArgument);

        assert_eq!(unsafe { advdyn_trajectory_outcome(handle, 1e-2) }, AdvdynOutcome::Draw);

        unsafe { advdyn_trajectory_free(handle) };
    }

    #[test]
    fn null_and_invalid_arguments_are_rejected() {
        let params = advdyn_params_default();
        let options = advdyn_integrator_defaults();
        let initial = stalemate_state();
        let mut handle: *mut AdvdynTrajectory = std::ptr::null_mut();

        let status = unsafe {
            advdyn_simulate(AdvdynModel::Supporter, std::ptr::null(), &initial, &options, &mut handle)
        };
        assert_eq!(status, AdvdynStatus::NullPointer);

        let mut bad = params;
        bad.capacity_red = -1.0;
        let status =
            unsafe { advdyn_simulate(AdvdynModel::Supporter, &bad, &initial, &options, &mut handle) };
        assert_eq!(status, AdvdynStatus::InvalidArgument);
        assert!(handle.is_null());

        unsafe { advdyn_trajectory_free(std::ptr::null_mut()) };
    }

    #[test]
    fn predictions_match_the_library() {
        let mut params = advdyn_params_default();
        params.lethality_red = 10.0;
        let initial = AdvdynState {
            blue: 1.5,
            red: 1.5,
            red_supporters: 1.0,
            blue_supporters: 1.0,
            neutral: 3.0,
        };
        let mut prediction = AdvdynPrediction {
            rho: 0.0,
            threshold_exact: 0.0,
            threshold_approx: 0.0,
            threshold_approx_valid: false,
            stalemate_timescale: 0.0,
            oscillatory: false,
            period: 0.0,
            period_valid: false,
            count: 0.0,
            count_valid: false,
        };
        let status = unsafe { advdyn_predict(&params, &initial, &mut prediction) };
        assert_eq!(status, AdvdynStatus::Ok);
        assert!((prediction.rho - 1.7199611490370514).abs() < 1e-12);
        assert!((prediction.threshold_exact - 0.37072444400392826).abs() < 1e-12);
        assert!(!prediction.threshold_approx_valid);
        assert!(prediction.oscillatory);

        // Out of the supporter-analytics domain.
        let bad = AdvdynState {
            blue: 1.5,
            red: 1.5,
            red_supporters: 3.0,
            blue_supporters: 1.0,
            neutral: 1.0,
        };
        let status = unsafe { advdyn_predict(&params, &bad, &mut prediction) };
        assert_eq!(status, AdvdynStatus::InvalidArgument);
    }

    #[test]
    fn csv_export_via_path() {
        let params = advdyn_params_default();
        let mut options = advdyn_integrator_defaults();
        options.t_end = 1.0;
        let initial = stalemate_state();
        let mut handle: *mut AdvdynTrajectory = std::ptr::null_mut();
        let status = unsafe {
            advdyn_simulate(AdvdynModel::Contributor, &params, &initial, &options, &mut handle)
        };
        assert_eq!(status, AdvdynStatus::Ok);

        let dir = std::env::temp_dir().join(format!("advdyn-capi-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("traj.csv");
        let c_path = CString::new(path.to_str().unwrap()).unwrap();
        let status = unsafe { advdyn_trajectory_write_csv(handle, c_path.as_ptr()) };
        assert_eq!(status, AdvdynStatus::Ok);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("t,B,R,g,gamma,Gamma,G_total"));
        assert_eq!(text.lines().count(), 102);
        std::fs::remove_dir_all(&dir).unwrap();

        unsafe { advdyn_trajectory_free(handle) };
    }

    #[test]
    fn version_is_nul_terminated() {
        let v = unsafe { CStr::from_ptr(advdyn_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
