//! Shared numeric primitives: parameter bundles, population state vectors,
//! the smooth step used to pin populations at zero, and the support
//! modulation factor.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute slack allowed below zero for population components. The smooth
/// step only approximately pins populations at zero, so trajectories show
/// tiny negative excursions of this order.
pub const POSITIVITY_TOL: f64 = 1e-6;

/// Standing populations below this are rejected: the modulation factor
/// divides by `detracting + standing`, and values near zero blow up.
pub const MIN_STANDING_POPULATION: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValidationError {
    #[error("`{field}` must be strictly positive, got {value}")]
    NotPositive { field: &'static str, value: f64 },
    #[error("`{field}` must be nonnegative, got {value}")]
    Negative { field: &'static str, value: f64 },
    #[error("`{field}` must be finite, got {value}")]
    NotFinite { field: &'static str, value: f64 },
    #[error("`standing_population` must be at least {MIN_STANDING_POPULATION}, got {value}")]
    StandingTooSmall { value: f64 },
    #[error("population component `{field}` is below the positivity slack -{POSITIVITY_TOL}, got {value}")]
    BelowPositivitySlack { field: &'static str, value: f64 },
    #[error("degenerate standing population: detracting + standing = {value} <= 0")]
    DegenerateStanding { value: f64 },
}

/// Shape of the tanh step that deems a population extinct.
///
/// The transition sits at `extinction_offset_scale / steepness` and has
/// width of order `1 / steepness`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmoothStepParams {
    pub steepness: f64,
    pub extinction_offset_scale: f64,
}

impl Default for SmoothStepParams {
    fn default() -> Self {
        Self { steepness: 1e6, extinction_offset_scale: 4.0 }
    }
}

impl SmoothStepParams {
    /// Point where the step evaluates to exactly 1/2.
    pub fn transition_point(&self) -> f64 {
        self.extinction_offset_scale / self.steepness
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        check_positive("step.steepness", self.steepness)?;
        check_positive("step.extinction_offset_scale", self.extinction_offset_scale)?;
        Ok(())
    }
}

/// Rate coefficients and capacities shared by both model variants.
///
/// `lethality_*` drive the attrition terms of the supporter model,
/// `transfer_*` the source/sink terms of the contributor model, and
/// `capacity_*` the logistic ceilings at which green support wanes.
/// `standing_population` generalises the unit denominator offset of the
/// modulation factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelParams {
    pub lethality_red: f64,
    pub lethality_blue: f64,
    pub transfer_blue: f64,
    pub transfer_red: f64,
    pub capacity_red: f64,
    pub capacity_blue: f64,
    pub standing_population: f64,
    pub step: SmoothStepParams,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            lethality_red: 1.0,
            lethality_blue: 1.0,
            transfer_blue: 1.0,
            transfer_red: 1.0,
            capacity_red: 1.0,
            capacity_blue: 1.0,
            standing_population: 1.0,
            step: SmoothStepParams::default(),
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), ValidationError> {
        check_nonnegative("lethality_red", self.lethality_red)?;
        check_nonnegative("lethality_blue", self.lethality_blue)?;
        check_nonnegative("transfer_blue", self.transfer_blue)?;
        check_nonnegative("transfer_red", self.transfer_red)?;
        check_positive("capacity_red", self.capacity_red)?;
        check_positive("capacity_blue", self.capacity_blue)?;
        if !self.standing_population.is_finite() {
            return Err(ValidationError::NotFinite {
                field: "standing_population",
                value: self.standing_population,
            });
        }
        if self.standing_population < MIN_STANDING_POPULATION {
            return Err(ValidationError::StandingTooSmall { value: self.standing_population });
        }
        self.step.validate()
    }
}

/// The five populations at one instant: two combatant forces and the three
/// green sub-populations (red supporters, blue supporters, neutral).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationState {
    pub blue: f64,
    pub red: f64,
    pub red_supporters: f64,
    pub blue_supporters: f64,
    pub neutral: f64,
}

impl PopulationState {
    pub fn new(blue: f64, red: f64, red_supporters: f64, blue_supporters: f64, neutral: f64) -> Self {
        Self { blue, red, red_supporters, blue_supporters, neutral }
    }

    /// Total green population g + gamma + Gamma.
    pub fn total_green(&self) -> f64 {
        self.red_supporters + self.blue_supporters + self.neutral
    }

    pub fn total_population(&self) -> f64 {
        self.blue + self.red + self.total_green()
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.blue, self.red, self.red_supporters, self.blue_supporters, self.neutral]
    }

    pub fn from_array(a: &[f64; 5]) -> Self {
        Self {
            blue: a[0],
            red: a[1],
            red_supporters: a[2],
            blue_supporters: a[3],
            neutral: a[4],
        }
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        const FIELDS: [&str; 5] = ["blue", "red", "red_supporters", "blue_supporters", "neutral"];
        for (field, value) in FIELDS.iter().zip(self.as_array()) {
            if !value.is_finite() {
                return Err(ValidationError::NotFinite { field, value });
            }
            if value < -POSITIVITY_TOL {
                return Err(ValidationError::BelowPositivitySlack { field, value });
            }
        }
        Ok(())
    }
}

/// Smooth Heaviside-like step: `0.5 * (tanh(steepness * (x - offset)) + 1)`
/// with `offset = extinction_offset_scale / steepness`. Monotone, bounded in
/// [0, 1], and exactly 1/2 at the transition point.
pub fn smooth_step(x: f64, p: &SmoothStepParams) -> f64 {
    0.5 * ((p.steepness * (x - p.extinction_offset_scale / p.steepness)).tanh() + 1.0)
}

/// Dimensionless support factor `supporting / (detracting + standing)`.
///
/// Linear in the supporting population, strictly decreasing in the
/// detracting one. A nonpositive denominator is rejected as a degenerate
/// standing population.
pub fn support_modulation(supporting: f64, detracting: f64, standing: f64) -> Result<f64, ValidationError> {
    let denom = detracting + standing;
    if denom <= 0.0 {
        return Err(ValidationError::DegenerateStanding { value: denom });
    }
    Ok(supporting / denom)
}

fn check_positive(field: &'static str, value: f64) -> Result<(), ValidationError> {
    if !value.is_finite() {
        return Err(ValidationError::NotFinite { field, value });
    }
    if value <= 0.0 {
        return Err(ValidationError::NotPositive { field, value });
    }
    Ok(())
}

fn check_nonnegative(field: &'static str, value: f64) -> Result<(), ValidationError> {
    if !value.is_finite() {
        return Err(ValidationError::NotFinite { field, value });
    }
    if value < 0.0 {
        return Err(ValidationError::Negative { field, value });
    }
    Ok(())
}
