//! Closed-form predictors for the near-peer reductions: the annihilation
//! threshold of the symmetric supporter system and the stalemate timescale,
//! oscillation period and count of the symmetric contributor system. Used
//! standalone and as oracles against the numerics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TheoryError {
    #[error("requires total_green0 > 2 * red_supporters0 > 0 (got G0 = {total_green0}, g0 = {red_supporters0})")]
    SupportDomain { total_green0: f64, red_supporters0: f64 },
    #[error("`{field}` must be strictly positive, got {value}")]
    NotPositive { field: &'static str, value: f64 },
    #[error("conserved-relation denominator degenerate: h(B) = {h} <= -1/2")]
    DegenerateRelation { h: f64 },
}

/// A closed-form value together with whether its derivation assumptions
/// hold at the given inputs. Sweeps deliberately probe outside the validity
/// window, so invalid predictions carry a value and a note instead of
/// failing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryPrediction {
    pub value: f64,
    pub valid: bool,
    pub note: String,
}

impl TheoryPrediction {
    fn valid(value: f64) -> Self {
        Self { value, valid: true, note: String::new() }
    }

    fn invalid(value: f64, note: impl Into<String>) -> Self {
        Self { value, valid: false, note: note.into() }
    }
}

fn support_log_ratio(total_green0: f64, red_supporters0: f64) -> Result<f64, TheoryError> {
    if !(total_green0 > 2.0 * red_supporters0 && red_supporters0 > 0.0) {
        return Err(TheoryError::SupportDomain { total_green0, red_supporters0 });
    }
    Ok((total_green0 * (1.0 + red_supporters0) / (total_green0 - 2.0 * red_supporters0)).ln())
}

/// Lethality-weighted log factor `rho` controlling the annihilation
/// threshold. Linear in the lethality.
pub fn rho(lethality_red: f64, total_green0: f64, red_supporters0: f64) -> Result<f64, TheoryError> {
    Ok(lethality_red / (total_green0 + 2.0) * support_log_ratio(total_green0, red_supporters0)?)
}

/// Critical red carrying capacity above which the symmetric supporter system
/// drives blue to zero: `B0 + rho - sqrt(rho * (rho + 2 B0))`.
pub fn annihilation_threshold(
    blue0: f64,
    lethality_red: f64,
    total_green0: f64,
    red_supporters0: f64,
) -> Result<f64, TheoryError> {
    if blue0 <= 0.0 {
        return Err(TheoryError::NotPositive { field: "blue0", value: blue0 });
    }
    let r = rho(lethality_red, total_green0, red_supporters0)?;
    Ok(blue0 + r - (r * (r + 2.0 * blue0)).sqrt())
}

/// Binomial-expansion approximation of the annihilation threshold, valid
/// when `|2 B0 / rho| < 1`.
pub fn annihilation_threshold_approx(
    blue0: f64,
    lethality_red: f64,
    total_green0: f64,
    red_supporters0: f64,
) -> Result<TheoryPrediction, TheoryError> {
    if blue0 <= 0.0 {
        return Err(TheoryError::NotPositive { field: "blue0", value: blue0 });
    }
    let log_ratio = support_log_ratio(total_green0, red_supporters0)?;
    let value = blue0 * blue0 * (total_green0 + 2.0) / (2.0 * lethality_red * log_ratio);
    let r = rho(lethality_red, total_green0, red_supporters0)?;
    let expansion_ratio = (2.0 * blue0 / r).abs();
    if expansion_ratio < 1.0 {
        Ok(TheoryPrediction::valid(value))
    } else {
        Ok(TheoryPrediction::invalid(
            value,
            format!("binomial expansion requires |2 B0 / rho| < 1, got {expansion_ratio:.4}"),
        ))
    }
}

/// Supporter level implied by blue along the conserved curve of the
/// symmetric supporter reduction.
pub fn conserved_support(
    blue: f64,
    blue0: f64,
    red_supporters0: f64,
    total_green0: f64,
    lethality_red: f64,
    capacity_red: f64,
) -> Result<f64, TheoryError> {
    if lethality_red <= 0.0 {
        return Err(TheoryError::NotPositive { field: "lethality_red", value: lethality_red });
    }
    if capacity_red <= 0.0 {
        return Err(TheoryError::NotPositive { field: "capacity_red", value: capacity_red });
    }
    // Validate the g0 domain up front.
    support_log_ratio(total_green0, red_supporters0)?;
    let prefactor = (1.0 + red_supporters0) / (total_green0 - 2.0 * red_supporters0);
    let quadratic = (blue - blue0) * (blue + blue0 - 2.0 * capacity_red);
    let h = prefactor
        * ((total_green0 + 2.0) / (2.0 * lethality_red * capacity_red) * quadratic).exp();
    if h <= -0.5 {
        return Err(TheoryError::DegenerateRelation { h });
    }
    Ok((total_green0 * h - 1.0) / (1.0 + 2.0 * h))
}

/// Duration of the oscillatory stalemate of the symmetric contributor
/// system: `(g0 + Gamma0 / 2) / capacity_red`.
pub fn stalemate_timescale(red_supporters0: f64, neutral0: f64, capacity_red: f64) -> f64 {
    (red_supporters0 + 0.5 * neutral0) / capacity_red
}

/// Oscillatory-regime condition of the linearised contributor reduction:
/// `transfer_blue < 1 + 2 sqrt(capacity_red * neutral0)`.
pub fn oscillation_condition(transfer_blue: f64, capacity_red: f64, neutral0: f64) -> bool {
    transfer_blue < 1.0 + 2.0 * (capacity_red * neutral0).sqrt()
}

fn discriminant(transfer_blue: f64, capacity_red: f64, neutral0: f64) -> f64 {
    let d = transfer_blue - 1.0;
    d * d - 4.0 * capacity_red * neutral0
}

/// Oscillation period of the linearised contributor reduction,
/// `4 pi / sqrt(|disc|)`. Marked invalid when the characteristic
/// discriminant is nonnegative, where no oscillation exists.
pub fn oscillation_period(transfer_blue: f64, capacity_red: f64, neutral0: f64) -> TheoryPrediction {
    let disc = discriminant(transfer_blue, capacity_red, neutral0);
    let value = 4.0 * std::f64::consts::PI / disc.abs().sqrt();
    if disc < 0.0 {
        TheoryPrediction::valid(value)
    } else {
        TheoryPrediction::invalid(
            value,
            format!("characteristic discriminant {disc:.6} is nonnegative: non-oscillatory"),
        )
    }
}

/// Expected number of oscillation periods before the stalemate timescale:
/// the ratio of [`stalemate_timescale`] to [`oscillation_period`]. A
/// macroscopic-trend predictor rather than an exact count.
pub fn oscillation_count(
    red_supporters0: f64,
    neutral0: f64,
    transfer_blue: f64,
    capacity_red: f64,
) -> TheoryPrediction {
    let period = oscillation_period(transfer_blue, capacity_red, neutral0);
    let value = stalemate_timescale(red_supporters0, neutral0, capacity_red) / period.value;
    if period.valid {
        TheoryPrediction::valid(value)
    } else {
        TheoryPrediction::invalid(value, period.note)
    }
}
