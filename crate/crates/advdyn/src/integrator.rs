//! Adaptive time integration with dense fixed-interval output.
//!
//! The scheme is the Dormand-Prince embedded 5(4) pair with proportional
//! step control. Sample points land exactly on the configured interval by
//! clipping the step, so output grids are identical across tolerance
//! settings. Numeric failures are recorded in the trajectory's termination
//! field rather than raised mid-run.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hard floor for the step size; below this the run is abandoned.
const MIN_STEP: f64 = 1e-12;
/// State magnitude past which a run is flagged as diverged.
const DIVERGENCE_LIMIT: f64 = 1e150;
/// Safety cap on total attempted steps.
const MAX_STEPS: u64 = 50_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegratorError {
    #[error("integrator config invalid: {0}")]
    InvalidConfig(String),
    #[error("initial state contains a non-finite component")]
    NonFiniteInitialState,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub t_end: f64,
    pub max_step: f64,
    pub sample_interval: f64,
    pub stop_on_extinction: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            abs_tol: 1e-8,
            t_end: 50.0,
            max_step: 0.1,
            sample_interval: 0.01,
            stop_on_extinction: false,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), IntegratorError> {
        let need = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(IntegratorError::InvalidConfig(format!("`{name}` must be positive, got {v}")))
            }
        };
        need("rel_tol", self.rel_tol)?;
        need("abs_tol", self.abs_tol)?;
        need("t_end", self.t_end)?;
        need("max_step", self.max_step)?;
        need("sample_interval", self.sample_interval)?;
        Ok(())
    }
}

/// Which combatant force an event refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Blue,
    Red,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Side::Blue => write!(f, "blue"),
            Side::Red => write!(f, "red"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    #[serde(rename = "reached_t_end")]
    ReachedEnd,
    Extinction(Side),
    Diverged,
    StepFailure,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Termination::ReachedEnd => write!(f, "reached_t_end"),
            Termination::Extinction(side) => write!(f, "extinction_{side}"),
            Termination::Diverged => write!(f, "diverged"),
            Termination::StepFailure => write!(f, "step_failure"),
        }
    }
}

/// Time-ordered dense samples of one integration run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
    pub termination: Termination,
    pub accepted_steps: u64,
    pub rejected_steps: u64,
}

impl<const N: usize> Trajectory<N> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_time(&self) -> Option<f64> {
        self.times.last().copied()
    }

    pub fn final_state(&self) -> Option<&[f64; N]> {
        self.states.last()
    }

    /// Values of one state component across all samples.
    pub fn component(&self, index: usize) -> impl Iterator<Item = f64> + '_ {
        self.states.iter().map(move |s| s[index])
    }
}

// Dormand-Prince 5(4) tableau. k2 row through k7 row; b are the 5th order
// weights (the k7 row doubles as them, FSAL), e = b5 - b4 for the error
// estimate.
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] =
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0];
const B: [f64; 6] =
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const C: [f64; 5] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0];

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;

/// Integrate `rhs` from t = 0 to `cfg.t_end`, sampling every
/// `cfg.sample_interval`. Deterministic for identical inputs.
pub fn integrate<const N: usize>(
    rhs: impl Fn(f64, &[f64; N]) -> [f64; N],
    y0: [f64; N],
    cfg: &IntegratorConfig,
) -> Result<Trajectory<N>, IntegratorError> {
    integrate_with_stop(rhs, y0, cfg, |_, _| None)
}

/// As [`integrate`], additionally stopping at the first sample where `stop`
/// reports an event. Used for early exit on extinction.
pub fn integrate_with_stop<const N: usize>(
    rhs: impl Fn(f64, &[f64; N]) -> [f64; N],
    y0: [f64; N],
    cfg: &IntegratorConfig,
    stop: impl Fn(f64, &[f64; N]) -> Option<Side>,
) -> Result<Trajectory<N>, IntegratorError> {
    cfg.validate()?;
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(IntegratorError::NonFiniteInitialState);
    }

    let sample_times = sample_grid(cfg.t_end, cfg.sample_interval);
    let mut traj = Trajectory {
        times: Vec::with_capacity(sample_times.len() + 1),
        states: Vec::with_capacity(sample_times.len() + 1),
        termination: Termination::ReachedEnd,
        accepted_steps: 0,
        rejected_steps: 0,
    };
    traj.times.push(0.0);
    traj.states.push(y0);
    if let Some(side) = stop(0.0, &y0) {
        traj.termination = Termination::Extinction(side);
        return Ok(traj);
    }

    let mut t = 0.0;
    let mut y = y0;
    let mut k1 = rhs(t, &y);
    let mut h = cfg.max_step.min(cfg.sample_interval).min(cfg.t_end);
    let mut next_sample = 0usize;
    let mut attempts: u64 = 0;

    'outer: while next_sample < sample_times.len() {
        let target = sample_times[next_sample];
        let span = target - t;
        let h_try = h.min(span);
        // Rounding in t + h_try can land on or past the target even when
        // h_try < span; both cases snap the step onto the sample point.
        let hits_target = h_try >= span || t + h_try >= target;

        attempts += 1;
        if attempts > MAX_STEPS {
            traj.termination = Termination::StepFailure;
            break;
        }

        // Stage evaluations.
        let mut k = [[0.0; N]; 7];
        k[0] = k1;
        k[1] = rhs(t + C[0] * h_try, &add_scaled(&y, h_try, &[(A2[0], &k[0])]));
        k[2] = rhs(t + C[1] * h_try, &add_scaled(&y, h_try, &[(A3[0], &k[0]), (A3[1], &k[1])]));
        k[3] = rhs(
            t + C[2] * h_try,
            &add_scaled(&y, h_try, &[(A4[0], &k[0]), (A4[1], &k[1]), (A4[2], &k[2])]),
        );
        k[4] = rhs(
            t + C[3] * h_try,
            &add_scaled(
                &y,
                h_try,
                &[(A5[0], &k[0]), (A5[1], &k[1]), (A5[2], &k[2]), (A5[3], &k[3])],
            ),
        );
        k[5] = rhs(
            t + C[4] * h_try,
            &add_scaled(
                &y,
                h_try,
                &[(A6[0], &k[0]), (A6[1], &k[1]), (A6[2], &k[2]), (A6[3], &k[3]), (A6[4], &k[4])],
            ),
        );
        let y_new = add_scaled(
            &y,
            h_try,
            &[(B[0], &k[0]), (B[2], &k[2]), (B[3], &k[3]), (B[4], &k[4]), (B[5], &k[5])],
        );
        let t_new = if hits_target { target } else { t + h_try };
        k[6] = rhs(t_new, &y_new);

        // Weighted RMS error of the embedded 4th order estimate.
        let mut err_sq = 0.0;
        for i in 0..N {
            let e_i = h_try
                * (E[0] * k[0][i]
                    + E[2] * k[2][i]
                    + E[3] * k[3][i]
                    + E[4] * k[4][i]
                    + E[5] * k[5][i]
                    + E[6] * k[6][i]);
            let scale = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y_new[i].abs());
            err_sq += (e_i / scale) * (e_i / scale);
        }
        let err = (err_sq / N as f64).sqrt();

        if !err.is_finite() {
            // A stage blew up; retry with a much smaller step.
            traj.rejected_steps += 1;
            h = h_try * FAC_MIN;
            if h < MIN_STEP {
                traj.termination = divergence_kind(&y);
                break;
            }
            continue;
        }

        if err <= 1.0 {
            traj.accepted_steps += 1;
            t = t_new;
            y = y_new;
            k1 = k[6];

            if y.iter().any(|v| !v.is_finite() || v.abs() > DIVERGENCE_LIMIT) {
                traj.termination = Termination::Diverged;
                break;
            }
            if hits_target {
                traj.times.push(t);
                traj.states.push(y);
                next_sample += 1;
                if let Some(side) = stop(t, &y) {
                    traj.termination = Termination::Extinction(side);
                    break 'outer;
                }
            }
            let fac = (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, FAC_MAX);
            h = (h_try * fac).min(cfg.max_step);
        } else {
            traj.rejected_steps += 1;
            let fac = (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, 1.0);
            h = h_try * fac;
            if h < MIN_STEP {
                traj.termination = Termination::StepFailure;
                break;
            }
        }
    }

    Ok(traj)
}

fn divergence_kind<const N: usize>(y: &[f64; N]) -> Termination {
    if y.iter().any(|v| !v.is_finite() || v.abs() > 1e100) {
        Termination::Diverged
    } else {
        Termination::StepFailure
    }
}

fn add_scaled<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut acc = 0.0;
        for (coeff, k) in terms {
            acc += coeff * k[i];
        }
        out[i] += h * acc;
    }
    out
}

/// Sample times strictly after t = 0: every multiple of `dt` up to `t_end`,
/// with `t_end` itself appended when the grid misses it.
fn sample_grid(t_end: f64, dt: f64) -> Vec<f64> {
    let count = (t_end / dt + 1e-9).floor() as usize;
    let mut grid = Vec::with_capacity(count + 1);
    for i in 1..=count {
        let t = i as f64 * dt;
        grid.push(t.min(t_end));
    }
    match grid.last() {
        Some(&last) if last >= t_end => {}
        _ => grid.push(t_end),
    }
    grid
}

/// 17-significant-digit decimal rendering used by all CSV emitters.
pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.16e}")
    }
}

impl Trajectory<5> {
    /// Dense samples as CSV, one row per sample. State layout follows
    /// [`crate::core::PopulationState::as_array`]; the trailing column is
    /// the total green population.
    pub fn write_population_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,B,R,g,gamma,Gamma,G_total")?;
        for (t, s) in self.times.iter().zip(&self.states) {
            let total_green = s[2] + s[3] + s[4];
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                fmt_float(*t),
                fmt_float(s[0]),
                fmt_float(s[1]),
                fmt_float(s[2]),
                fmt_float(s[3]),
                fmt_float(s[4]),
                fmt_float(total_green),
            )?;
        }
        Ok(())
    }
}

/// First time at which blue or red drops below `threshold`, linearly
/// interpolated between the bracketing samples. Layout follows
/// [`crate::core::PopulationState::as_array`].
pub fn detect_extinction(traj: &Trajectory<5>, threshold: f64) -> Option<(f64, Side)> {
    let blue = first_drop(traj, 0, threshold);
    let red = first_drop(traj, 1, threshold);
    match (blue, red) {
        (Some(tb), Some(tr)) => {
            if tb <= tr {
                Some((tb, Side::Blue))
            } else {
                Some((tr, Side::Red))
            }
        }
        (Some(tb), None) => Some((tb, Side::Blue)),
        (None, Some(tr)) => Some((tr, Side::Red)),
        (None, None) => None,
    }
}

fn first_drop(traj: &Trajectory<5>, index: usize, threshold: f64) -> Option<f64> {
    let mut prev: Option<(f64, f64)> = None;
    for (&t, s) in traj.times.iter().zip(&traj.states) {
        let v = s[index];
        if v < threshold {
            return Some(match prev {
                Some((t0, v0)) if v0 != v => {
                    let frac = (v0 - threshold) / (v0 - v);
                    t0 + frac.clamp(0.0, 1.0) * (t - t0)
                }
                _ => t,
            });
        }
        prev = Some((t, v));
    }
    None
}
