//! Trajectory post-processing: outcome classification, oscillation period
//! counting, and conservation residuals.

use crate::core::PopulationState;
use crate::integrator::{Termination, Trajectory};
use crate::models::{BLUE, BLUE_SUPPORTERS, NEUTRAL, RED, RED_SUPPORTERS};
use crate::{core::ModelParams, core::smooth_step};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("trajectory is empty")]
    EmptyTrajectory,
    #[error("classification refused: trajectory terminated with {0}")]
    UnusableTrajectory(Termination),
    #[error("need at least {needed} samples, trajectory has {got}")]
    TooFewSamples { needed: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    BlueVictory,
    RedVictory,
    Draw,
}

impl OutcomeKind {
    /// Short label used in sweep CSV output.
    pub fn label(&self) -> &'static str {
        match self {
            OutcomeKind::BlueVictory => "blue",
            OutcomeKind::RedVictory => "red",
            OutcomeKind::Draw => "draw",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub kind: OutcomeKind,
    /// Final red minus final blue.
    pub margin: f64,
    pub final_state: PopulationState,
}

/// Classify by the sign of the final margin red - blue; magnitudes within
/// `draw_threshold` are draws. Trajectories that diverged or failed carry no
/// usable final state and are refused.
pub fn classify_outcome(traj: &Trajectory<5>, draw_threshold: f64) -> Result<Outcome, AnalysisError> {
    match traj.termination {
        Termination::Diverged | Termination::StepFailure => {
            return Err(AnalysisError::UnusableTrajectory(traj.termination))
        }
        Termination::ReachedEnd | Termination::Extinction(_) => {}
    }
    let last = traj.final_state().ok_or(AnalysisError::EmptyTrajectory)?;
    let margin = last[RED] - last[BLUE];
    let kind = if margin > draw_threshold {
        OutcomeKind::RedVictory
    } else if margin < -draw_threshold {
        OutcomeKind::BlueVictory
    } else {
        OutcomeKind::Draw
    };
    Ok(Outcome { kind, margin, final_state: PopulationState::from_array(last) })
}

/// Population component selector for period counting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateComponent {
    Blue,
    Red,
    RedSupporters,
    BlueSupporters,
    Neutral,
}

impl StateComponent {
    pub fn index(&self) -> usize {
        match self {
            StateComponent::Blue => BLUE,
            StateComponent::Red => RED,
            StateComponent::RedSupporters => RED_SUPPORTERS,
            StateComponent::BlueSupporters => BLUE_SUPPORTERS,
            StateComponent::Neutral => NEUTRAL,
        }
    }
}

/// One prominence-filtered crossing of a reference level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub time: f64,
    pub upward: bool,
}

/// Crossings of `reference` by the sampled series, with hysteresis: a
/// crossing registers only once the series has moved at least
/// `prominence_floor` past the reference on the new side, so ripple smaller
/// than the floor never counts. The crossing time is linearly interpolated.
pub fn level_crossings(
    times: &[f64],
    values: &[f64],
    reference: f64,
    prominence_floor: f64,
) -> Vec<Crossing> {
    assert_eq!(times.len(), values.len());
    let floor = prominence_floor.max(0.0);
    let region = |v: f64| -> i8 {
        let d = v - reference;
        if d >= floor {
            1
        } else if d <= -floor {
            -1
        } else {
            0
        }
    };

    let mut crossings = Vec::new();
    if values.is_empty() {
        return crossings;
    }
    // The first sample fixes the starting side. Every later switch to a
    // different out-of-band side is a crossing; this includes leaving a
    // starting position inside the band.
    let mut side = region(values[0]);
    let mut last_committed = 0usize;

    for i in 1..values.len() {
        let r = region(values[i]);
        if r == 0 || r == side {
            continue;
        }
        let time = interpolate_crossing(times, values, last_committed, i, reference);
        crossings.push(Crossing { time, upward: r > 0 });
        side = r;
        last_committed = i;
    }
    crossings
}

fn interpolate_crossing(
    times: &[f64],
    values: &[f64],
    from: usize,
    to: usize,
    reference: f64,
) -> f64 {
    // Scan the span for the sign change closest to the destination side.
    for j in (from..to).rev() {
        let a = values[j] - reference;
        let b = values[j + 1] - reference;
        let straddles =
            (a < 0.0 && b >= 0.0) || (a > 0.0 && b <= 0.0) || (a == 0.0 && b != 0.0);
        if straddles {
            if a == b {
                return times[j];
            }
            let frac = (a / (a - b)).clamp(0.0, 1.0);
            return times[j] + frac * (times[j + 1] - times[j]);
        }
    }
    times[to]
}

/// Completed oscillation periods of one component about a reference level:
/// downward reference crossings that follow at least one upward crossing,
/// with sub-floor excursions ignored.
pub fn count_periods(
    traj: &Trajectory<5>,
    component: StateComponent,
    reference: f64,
    prominence_floor: f64,
) -> u32 {
    let values: Vec<f64> = traj.component(component.index()).collect();
    count_periods_in(&traj.times, &values, reference, prominence_floor)
}

/// As [`count_periods`] for a bare sampled series.
pub fn count_periods_in(times: &[f64], values: &[f64], reference: f64, prominence_floor: f64) -> u32 {
    let mut ups = 0u32;
    let mut periods = 0u32;
    for c in level_crossings(times, values, reference, prominence_floor) {
        if c.upward {
            ups += 1;
        } else if ups > 0 {
            periods += 1;
        }
    }
    periods
}

/// Interior extrema committed by a direction-reversal scan with hysteresis:
/// an extremum registers only once the series has retraced at least
/// `prominence` from the running extreme, so ripple below the floor never
/// commits one. Returns `(time, value)` pairs in order.
pub fn prominent_extrema(times: &[f64], values: &[f64], prominence: f64) -> Vec<(f64, f64)> {
    assert_eq!(times.len(), values.len());
    let prominence = prominence.max(0.0);
    let mut extrema = Vec::new();
    let Some(&first) = values.first() else { return extrema };
    let (mut hi, mut hi_t) = (first, times[0]);
    let (mut lo, mut lo_t) = (first, times[0]);
    let mut direction: i8 = 0;
    for (&t, &v) in times.iter().zip(values).skip(1) {
        if v > hi {
            hi = v;
            hi_t = t;
        }
        if v < lo {
            lo = v;
            lo_t = t;
        }
        match direction {
            0 => {
                if v <= hi - prominence {
                    direction = -1;
                    lo = v;
                    lo_t = t;
                } else if v >= lo + prominence {
                    direction = 1;
                    hi = v;
                    hi_t = t;
                }
            }
            1 => {
                if v <= hi - prominence {
                    extrema.push((hi_t, hi)); // committed a maximum
                    direction = -1;
                    lo = v;
                    lo_t = t;
                }
            }
            _ => {
                if v >= lo + prominence {
                    extrema.push((lo_t, lo)); // committed a minimum
                    direction = 1;
                    hi = v;
                    hi_t = t;
                }
            }
        }
    }
    extrema
}

/// Completed oscillation cycles measured from prominent interior extrema:
/// every minimum-to-maximum (or maximum-to-minimum) alternation pair counts
/// one cycle. Unlike reference-level counting this sees oscillations whose
/// centre drifts, at the price of needing no reference at all.
pub fn count_oscillation_cycles(values: &[f64], prominence: f64) -> u32 {
    let times: Vec<f64> = (0..values.len()).map(|i| i as f64).collect();
    (prominent_extrema(&times, values, prominence).len() / 2) as u32
}

/// Largest deviation of the total green population from its initial value.
/// Zero for conservative (supporter) dynamics up to integration error.
pub fn conservation_residual(traj: &Trajectory<5>) -> f64 {
    let Some(first) = traj.states.first() else { return 0.0 };
    let total0 = first[RED_SUPPORTERS] + first[BLUE_SUPPORTERS] + first[NEUTRAL];
    traj.states
        .iter()
        .map(|s| ((s[RED_SUPPORTERS] + s[BLUE_SUPPORTERS] + s[NEUTRAL]) - total0).abs())
        .fold(0.0, f64::max)
}

/// Residual of the contributor-model green decay identity
/// `dG/dt = -transfer_blue * gamma * step(gamma) - transfer_red * g * step(g)`,
/// with dG/dt estimated by central differences on the dense samples.
pub fn green_decay_residual(traj: &Trajectory<5>, params: &ModelParams) -> Result<f64, AnalysisError> {
    if traj.len() < 3 {
        return Err(AnalysisError::TooFewSamples { needed: 3, got: traj.len() });
    }
    let total: Vec<f64> = traj
        .states
        .iter()
        .map(|s| s[RED_SUPPORTERS] + s[BLUE_SUPPORTERS] + s[NEUTRAL])
        .collect();
    let mut worst = 0.0f64;
    for i in 1..traj.len() - 1 {
        let dt = traj.times[i + 1] - traj.times[i - 1];
        let d_total = (total[i + 1] - total[i - 1]) / dt;
        let s = &traj.states[i];
        let sinks = params.transfer_blue * s[BLUE_SUPPORTERS] * smooth_step(s[BLUE_SUPPORTERS], &params.step)
            + params.transfer_red * s[RED_SUPPORTERS] * smooth_step(s[RED_SUPPORTERS], &params.step);
        worst = worst.max((d_total + sinks).abs());
    }
    Ok(worst)
}
