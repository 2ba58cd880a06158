//! Numerical laboratory for two Blue/Red/Green adversarial-dynamics models:
//! a supporter variant in which the green population modulates combat
//! effectiveness while conserving its total, and a contributor variant in
//! which green sub-populations feed combatant strength directly.
//!
//! The crate provides the model vector fields and their near-peer
//! reductions ([`models`]), an adaptive integrator with dense output
//! ([`integrator`]), trajectory post-processing ([`analysis`]), closed-form
//! predictors ([`theory`]), parallel two-parameter sweeps ([`sweep`]), and
//! the configuration plumbing behind the `advdyn` command-line tool
//! ([`config`], [`cli`]).

pub mod analysis;
pub mod cli;
pub mod compare;
pub mod config;
pub mod core;
pub mod integrator;
pub mod models;
pub mod sweep;
pub mod theory;

pub use crate::core::{ModelParams, PopulationState, SmoothStepParams};
pub use crate::integrator::{IntegratorConfig, Side, Termination, Trajectory};
pub use crate::models::Model;
