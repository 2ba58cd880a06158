//! Right-hand-side definitions: the two full five-population models plus the
//! reduced, perturbative, and memory-variable systems used to analyse the
//! near-peer regime.
//!
//! Full states are arrays in the layout of
//! [`PopulationState::as_array`]: `[blue, red, red_supporters,
//! blue_supporters, neutral]`.

use crate::core::{smooth_step, ModelParams, PopulationState};
use crate::integrator::{
    integrate, integrate_with_stop, IntegratorConfig, IntegratorError, Side, Trajectory,
};
use serde::{Deserialize, Serialize};

pub const BLUE: usize = 0;
pub const RED: usize = 1;
pub const RED_SUPPORTERS: usize = 2;
pub const BLUE_SUPPORTERS: usize = 3;
pub const NEUTRAL: usize = 4;

/// Exponent arguments in the memory-variable systems are capped here; past
/// this the reduction is invalid anyway and the run is left to be flagged as
/// diverged instead of propagating infinities.
pub const EXP_ARG_CAP: f64 = 700.0;

/// Supporter variant: green modulates combat effectiveness, total green is
/// conserved. The neutral component is computed as the negative sum of the
/// two supporter flows, so the green components of the returned derivative
/// sum to exactly zero.
pub fn supporter_rhs(y: &[f64; 5], p: &ModelParams) -> [f64; 5] {
    let [b, r, g, gam, neu] = *y;
    let theta_b = smooth_step(b, &p.step);
    let theta_r = smooth_step(r, &p.step);
    let theta_g = smooth_step(g, &p.step);
    let theta_gam = smooth_step(gam, &p.step);

    let d_blue = -p.lethality_red * (g / (gam + p.standing_population)) * r * theta_b;
    let d_red = -p.lethality_blue * (gam / (g + p.standing_population)) * b * theta_r;
    let d_g = g * neu * r * (1.0 - r / p.capacity_red * theta_g);
    let d_gam = gam * neu * b * (1.0 - b / p.capacity_blue * theta_gam);
    [d_blue, d_red, d_g, d_gam, -(d_g + d_gam)]
}

/// Contributor variant: supporter populations feed combatant strength as
/// sources, total green decays at the transfer rate. The flow terms between
/// the green sub-populations are computed once and reused, so
/// `d(g + gamma + Gamma)` equals the negative transfer sinks up to rounding.
pub fn contributor_rhs(y: &[f64; 5], p: &ModelParams) -> [f64; 5] {
    let [b, r, g, gam, neu] = *y;
    let theta_b = smooth_step(b, &p.step);
    let theta_r = smooth_step(r, &p.step);
    let theta_g = smooth_step(g, &p.step);
    let theta_gam = smooth_step(gam, &p.step);

    let flow_g = g * neu * r * (1.0 - r / p.capacity_red * theta_g);
    let flow_gam = gam * neu * b * (1.0 - b / p.capacity_blue * theta_gam);
    let sink_g = p.transfer_red * g * theta_g;
    let sink_gam = p.transfer_blue * gam * theta_gam;

    [
        -r * theta_b + sink_gam,
        -b * theta_r + sink_g,
        flow_g - sink_g,
        flow_gam - sink_gam,
        -(flow_g + flow_gam),
    ]
}

/// Symmetric supporter reduction, state `[blue, red_supporters]`. The step
/// factors are dropped, as is a distinct standing population (fixed at 1),
/// so agreement with the full model holds only away from extinction.
pub fn reduced_supporter_rhs(
    y: &[f64; 2],
    lethality_red: f64,
    capacity_red: f64,
    total_green0: f64,
) -> [f64; 2] {
    let [b, g] = *y;
    [
        -lethality_red * (g / (1.0 + g)) * b,
        g * (total_green0 - 2.0 * g) * b * (1.0 - b / capacity_red),
    ]
}

/// Symmetric contributor reduction, state `[blue, red_supporters, neutral]`.
pub fn reduced_contributor_rhs(y: &[f64; 3], transfer_blue: f64, capacity_red: f64) -> [f64; 3] {
    let [b, g, neu] = *y;
    let flow = g * neu * b * (1.0 - b / capacity_red);
    [-b + transfer_blue * g, flow - transfer_blue * g, -2.0 * flow]
}

/// Contributor reduction linearised about blue = capacity, state
/// `[offset, red_supporters, neutral]` with offset = blue - capacity_red.
/// Quadratic terms in the offset are dropped.
pub fn perturbation_rhs(y: &[f64; 3], transfer_blue: f64, capacity_red: f64) -> [f64; 3] {
    let [eps, g, neu] = *y;
    [
        -capacity_red - eps + transfer_blue * g,
        -g * neu * eps - transfer_blue * g,
        2.0 * g * neu * eps,
    ]
}

/// Parameters of the memory-variable ("alpha") systems derived from the
/// perturbative contributor reduction. The state is
/// `[alpha, alpha_dot, quad_integral]` where alpha integrates the offset,
/// alpha_dot is the offset itself, and quad_integral accumulates its square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaSystem {
    pub transfer_blue: f64,
    pub capacity_red: f64,
    pub red_supporters0: f64,
    pub neutral0: f64,
}

impl AlphaSystem {
    /// Starting state: alpha and its derivative are zero by construction and
    /// the quadratic memory starts empty.
    pub fn initial_state(&self) -> [f64; 3] {
        [0.0; 3]
    }

    fn forcing(&self, t: f64) -> f64 {
        self.transfer_blue * (self.red_supporters0 + 0.5 * self.neutral0 - self.capacity_red * t)
            - self.capacity_red
    }

    fn neutral_term(&self, exponent_arg: f64) -> f64 {
        0.5 * self.transfer_blue * self.neutral0 * exponent_arg.min(EXP_ARG_CAP).exp()
    }

    /// Full integro-differential form: the exponent carries both the linear
    /// memory (alpha) and the quadratic memory integral. Equivalent to the
    /// perturbative reduction along trajectories started from rest.
    pub fn integro_rhs(&self, t: f64, y: &[f64; 3]) -> [f64; 3] {
        let [alpha, alpha_dot, quad] = *y;
        let arg =
            (alpha_dot * alpha_dot + 2.0 * (self.capacity_red * alpha + quad)) / self.transfer_blue;
        let acc = self.forcing(t)
            - self.neutral_term(arg)
            - (self.transfer_blue + 1.0) * alpha_dot
            - self.transfer_blue * alpha;
        [alpha_dot, acc, alpha_dot * alpha_dot]
    }

    /// Forced autonomous approximation: the quadratic memory integral is
    /// dropped from the exponent. The state keeps the integral component so
    /// trajectories stay directly comparable with the full form.
    pub fn forced_autonomous_rhs(&self, t: f64, y: &[f64; 3]) -> [f64; 3] {
        let [alpha, alpha_dot, _quad] = *y;
        let arg = (alpha_dot * alpha_dot + 2.0 * self.capacity_red * alpha) / self.transfer_blue;
        let acc = self.forcing(t)
            - self.neutral_term(arg)
            - (self.transfer_blue + 1.0) * alpha_dot
            - self.transfer_blue * alpha;
        [alpha_dot, acc, alpha_dot * alpha_dot]
    }

    /// Fully linearised constant-coefficient form, state `[alpha, alpha_dot]`.
    pub fn linear_rhs(&self, t: f64, y: &[f64; 2]) -> [f64; 2] {
        let [alpha, alpha_dot] = *y;
        let acc = self.transfer_blue * (self.red_supporters0 - self.capacity_red * t)
            - self.capacity_red
            - (self.transfer_blue + 1.0) * alpha_dot
            - (self.transfer_blue + self.capacity_red * self.neutral0) * alpha;
        [alpha_dot, acc]
    }

    /// Neutral population reconstructed from the memory state; the third
    /// order of the system is kept by never integrating it directly.
    pub fn neutral_from_state(&self, y: &[f64; 3]) -> f64 {
        let [alpha, alpha_dot, quad] = *y;
        let arg =
            (alpha_dot * alpha_dot + 2.0 * (self.capacity_red * alpha + quad)) / self.transfer_blue;
        self.neutral0 * arg.min(EXP_ARG_CAP).exp()
    }
}

/// State of the symmetric supporter reduction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedSupporterState {
    pub blue: f64,
    pub red_supporters: f64,
}

impl ReducedSupporterState {
    pub fn as_array(&self) -> [f64; 2] {
        [self.blue, self.red_supporters]
    }

    pub fn from_array(a: &[f64; 2]) -> Self {
        Self { blue: a[0], red_supporters: a[1] }
    }
}

/// State of the symmetric contributor reduction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedContributorState {
    pub blue: f64,
    pub red_supporters: f64,
    pub neutral: f64,
}

impl ReducedContributorState {
    pub fn as_array(&self) -> [f64; 3] {
        [self.blue, self.red_supporters, self.neutral]
    }

    pub fn from_array(a: &[f64; 3]) -> Self {
        Self { blue: a[0], red_supporters: a[1], neutral: a[2] }
    }
}

/// State of the perturbative reduction; `offset` is blue minus the red
/// carrying capacity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationState {
    pub offset: f64,
    pub red_supporters: f64,
    pub neutral: f64,
}

impl PerturbationState {
    pub fn as_array(&self) -> [f64; 3] {
        [self.offset, self.red_supporters, self.neutral]
    }

    pub fn from_array(a: &[f64; 3]) -> Self {
        Self { offset: a[0], red_supporters: a[1], neutral: a[2] }
    }
}

/// Memory state of the alpha systems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaState {
    pub alpha: f64,
    pub alpha_dot: f64,
    pub quad_integral: f64,
}

impl AlphaState {
    pub fn from_array(a: &[f64; 3]) -> Self {
        Self { alpha: a[0], alpha_dot: a[1], quad_integral: a[2] }
    }
}

/// Which system a run integrates. The reduced variants live on the
/// symmetric manifold; their trajectories are expanded back to the full
/// five-population layout for analysis and export.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Hash)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Supporter,
    Contributor,
    ReducedSupporter,
    ReducedContributor,
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::Supporter => "supporter",
            Model::Contributor => "contributor",
            Model::ReducedSupporter => "reduced_supporter",
            Model::ReducedContributor => "reduced_contributor",
        }
    }

    /// Integrate this model from `initial`, returning dense samples in the
    /// full five-population layout. `extinction_threshold` is only consulted
    /// when the config asks to stop on extinction.
    pub fn run(
        &self,
        params: &ModelParams,
        initial: &PopulationState,
        cfg: &IntegratorConfig,
        extinction_threshold: f64,
    ) -> Result<Trajectory<5>, IntegratorError> {
        let stop_enabled = cfg.stop_on_extinction;
        let stop5 = move |_t: f64, y: &[f64; 5]| -> Option<Side> {
            if !stop_enabled {
                return None;
            }
            if y[BLUE] < extinction_threshold {
                Some(Side::Blue)
            } else if y[RED] < extinction_threshold {
                Some(Side::Red)
            } else {
                None
            }
        };

        match self {
            Model::Supporter => {
                integrate_with_stop(|_t, y| supporter_rhs(y, params), initial.as_array(), cfg, stop5)
            }
            Model::Contributor => integrate_with_stop(
                |_t, y| contributor_rhs(y, params),
                initial.as_array(),
                cfg,
                stop5,
            ),
            Model::ReducedSupporter => {
                let total_green0 = initial.total_green();
                let y0 = ReducedSupporterState {
                    blue: initial.blue,
                    red_supporters: initial.red_supporters,
                }
                .as_array();
                let traj = integrate_with_stop(
                    |_t, y| {
                        reduced_supporter_rhs(y, params.lethality_red, params.capacity_red, total_green0)
                    },
                    y0,
                    cfg,
                    move |_t, y: &[f64; 2]| {
                        if stop_enabled && y[0] < extinction_threshold {
                            Some(Side::Blue)
                        } else {
                            None
                        }
                    },
                )?;
                Ok(expand_reduced_supporter(&traj, total_green0))
            }
            Model::ReducedContributor => {
                let y0 = ReducedContributorState {
                    blue: initial.blue,
                    red_supporters: initial.red_supporters,
                    neutral: initial.neutral,
                }
                .as_array();
                let traj = integrate_with_stop(
                    |_t, y| reduced_contributor_rhs(y, params.transfer_blue, params.capacity_red),
                    y0,
                    cfg,
                    move |_t, y: &[f64; 3]| {
                        if stop_enabled && y[0] < extinction_threshold {
                            Some(Side::Blue)
                        } else {
                            None
                        }
                    },
                )?;
                Ok(expand_reduced_contributor(&traj))
            }
        }
    }
}

/// Lift a symmetric supporter trajectory `[blue, g]` back to five
/// populations: red mirrors blue, blue supporters mirror red supporters, and
/// the neutral pool is fixed by green conservation.
fn expand_reduced_supporter(traj: &Trajectory<2>, total_green0: f64) -> Trajectory<5> {
    Trajectory {
        times: traj.times.clone(),
        states: traj
            .states
            .iter()
            .map(|&[b, g]| [b, b, g, g, total_green0 - 2.0 * g])
            .collect(),
        termination: traj.termination,
        accepted_steps: traj.accepted_steps,
        rejected_steps: traj.rejected_steps,
    }
}

/// Lift a symmetric contributor trajectory `[blue, g, neutral]` back to five
/// populations.
fn expand_reduced_contributor(traj: &Trajectory<3>) -> Trajectory<5> {
    Trajectory {
        times: traj.times.clone(),
        states: traj.states.iter().map(|&[b, g, neu]| [b, b, g, g, neu]).collect(),
        termination: traj.termination,
        accepted_steps: traj.accepted_steps,
        rejected_steps: traj.rejected_steps,
    }
}

/// Convenience wrapper over the plain integrator for full-model arrays.
pub fn integrate_full(
    rhs: impl Fn(f64, &[f64; 5]) -> [f64; 5],
    initial: &PopulationState,
    cfg: &IntegratorConfig,
) -> Result<Trajectory<5>, IntegratorError> {
    integrate(rhs, initial.as_array(), cfg)
}
