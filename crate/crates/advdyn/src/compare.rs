//! Paired numeric/theory experiments: each mode runs a numerical leg and
//! the matching closed-form predictor, then reports per-cell or per-time
//! agreement metrics plus an overall agreement fraction.

use crate::config::{CompareMode, RunConfig, SweepAxes};
use crate::core::{ModelParams, PopulationState};
use crate::integrator::{fmt_float, integrate, Termination};
use crate::models::{self, AlphaState, AlphaSystem, Model, PerturbationState, BLUE};
use crate::sweep::{run_sweep, AxisSpec, SweepSpec};
use crate::theory;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CompareError {
    #[error("comparison config invalid: {0}")]
    Config(String),
    #[error("numeric leg failed: {0}")]
    Numeric(String),
}

#[derive(Debug, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum CompareReport {
    AnnihilationBoundary(BoundaryReport),
    OscillationCounts(CountsReport),
    ReducedEquivalence(EquivalenceReport),
    AlphaLadder(LadderReport),
}

impl CompareReport {
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> std::io::Result<()> {
        match self {
            CompareReport::AnnihilationBoundary(r) => r.write_csv(w),
            CompareReport::OscillationCounts(r) => r.write_csv(w),
            CompareReport::ReducedEquivalence(r) => r.write_csv(w),
            CompareReport::AlphaLadder(r) => r.write_csv(w),
        }
    }

    pub fn summary_line(&self) -> String {
        match self {
            CompareReport::AnnihilationBoundary(r) => format!(
                "annihilation_boundary: agreement {:.4} ({}/{} cells)",
                r.agreement_fraction, r.cells_agreeing, r.cells_total
            ),
            CompareReport::OscillationCounts(r) => format!(
                "oscillation_counts: regime agreement {:.4} ({}/{} cells), mean |count diff| {:.3}",
                r.regime_agreement_fraction, r.cells_agreeing, r.cells_total, r.mean_count_difference
            ),
            CompareReport::ReducedEquivalence(r) => format!(
                "reduced_equivalence: sup |B_full - B_reduced| = {:.3e} over [0, {:.3}], agreement {:.4}",
                r.sup_blue_difference, r.window_end, r.agreement_fraction
            ),
            CompareReport::AlphaLadder(r) => format!(
                "alpha_ladder: sup |memory - perturbation| = {:.3e} (bound {:.1e}), linear deviation {:.3e}, agreement {:.4}",
                r.sup_integro_difference, r.tolerance_bound, r.sup_linear_difference, r.agreement_fraction
            ),
        }
    }
}

pub fn run_compare(cfg: &RunConfig, workers: usize) -> Result<CompareReport, CompareError> {
    let compare = cfg
        .compare
        .as_ref()
        .ok_or_else(|| CompareError::Config("compare subcommand needs a `compare` section".into()))?;
    match compare.mode {
        CompareMode::AnnihilationBoundary => {
            annihilation_boundary(cfg, workers).map(CompareReport::AnnihilationBoundary)
        }
        CompareMode::OscillationCounts => {
            oscillation_counts(cfg, workers).map(CompareReport::OscillationCounts)
        }
        CompareMode::ReducedEquivalence => {
            reduced_equivalence(cfg).map(CompareReport::ReducedEquivalence)
        }
        CompareMode::AlphaLadder => alpha_ladder(cfg).map(CompareReport::AlphaLadder),
    }
}

// ---------------------------------------------------------------------------
// Annihilation boundary: symmetric supporter sweep vs the critical capacity.

#[derive(Debug, Serialize)]
pub struct BoundaryReport {
    pub cells_total: usize,
    pub cells_agreeing: usize,
    pub agreement_fraction: f64,
    pub extinction_threshold: f64,
    #[serde(skip)]
    pub rows: Vec<BoundaryRow>,
}

#[derive(Debug, Clone, Copy)]
pub struct BoundaryRow {
    pub lethality: f64,
    pub capacity: f64,
    pub final_blue: f64,
    pub numeric_annihilated: bool,
    pub predicted_annihilated: bool,
}

impl BoundaryReport {
    fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "lethality,capacity,final_B,numeric_annihilated,predicted_annihilated,agree")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                fmt_float(r.lethality),
                fmt_float(r.capacity),
                fmt_float(r.final_blue),
                r.numeric_annihilated as u8,
                r.predicted_annihilated as u8,
                (r.numeric_annihilated == r.predicted_annihilated) as u8,
            )?;
        }
        Ok(())
    }
}

fn default_boundary_grid() -> SweepAxes {
    SweepAxes {
        axis_x: AxisSpec { param: "lethality".into(), min: 0.0, max: 20.0, points: 60 },
        axis_y: AxisSpec { param: "capacity".into(), min: 0.0, max: 2.0, points: 60 },
    }
}

fn require_symmetric_initial(initial: &PopulationState) -> Result<(), CompareError> {
    if initial.blue != initial.red || initial.red_supporters != initial.blue_supporters {
        return Err(CompareError::Config(
            "this comparison assumes a symmetric initial state (blue = red, red_supporters = blue_supporters)"
                .into(),
        ));
    }
    Ok(())
}

fn annihilation_boundary(cfg: &RunConfig, workers: usize) -> Result<BoundaryReport, CompareError> {
    require_symmetric_initial(&cfg.initial)?;
    let grid = cfg.compare.as_ref().and_then(|c| c.grid.clone()).unwrap_or_else(default_boundary_grid);
    let spec = SweepSpec {
        model: Model::Supporter,
        axis_x: grid.axis_x,
        axis_y: grid.axis_y,
        params: cfg.params,
        initial: cfg.initial,
        integrator: cfg.integrator,
        report: cfg.report,
    };
    let result = run_sweep(&spec, workers).map_err(|e| CompareError::Config(e.to_string()))?;

    let blue0 = cfg.initial.blue;
    let total_green0 = cfg.initial.total_green();
    let red_supporters0 = cfg.initial.red_supporters;
    let threshold = cfg.report.extinction_threshold;

    let mut rows = Vec::with_capacity(result.records.len());
    let mut agreeing = 0usize;
    for r in &result.records {
        if matches!(r.termination, Termination::Diverged | Termination::StepFailure) {
            return Err(CompareError::Numeric(format!(
                "cell (lethality {}, capacity {}) terminated with {}",
                r.x, r.y, r.termination
            )));
        }
        let numeric = r.final_state.blue < threshold;
        let critical = theory::annihilation_threshold(blue0, r.x, total_green0, red_supporters0)
            .map_err(|e| CompareError::Config(e.to_string()))?;
        let predicted = r.y > critical;
        if numeric == predicted {
            agreeing += 1;
        }
        rows.push(BoundaryRow {
            lethality: r.x,
            capacity: r.y,
            final_blue: r.final_state.blue,
            numeric_annihilated: numeric,
            predicted_annihilated: predicted,
        });
    }
    let total = rows.len();
    Ok(BoundaryReport {
        cells_total: total,
        cells_agreeing: agreeing,
        agreement_fraction: agreeing as f64 / total as f64,
        extinction_threshold: threshold,
        rows,
    })
}

// ---------------------------------------------------------------------------
// Oscillation counts: reduced contributor sweep vs the linearised count.

#[derive(Debug, Serialize)]
pub struct CountsReport {
    pub cells_total: usize,
    /// Cells where "numeric count >= 1" matches the closed-form regime test.
    pub cells_agreeing: usize,
    pub regime_agreement_fraction: f64,
    /// Mean |numeric - predicted| over cells where the prediction is valid.
    pub mean_count_difference: f64,
    #[serde(skip)]
    pub rows: Vec<CountsRow>,
}

#[derive(Debug, Clone, Copy)]
pub struct CountsRow {
    pub transfer_blue: f64,
    pub capacity_red: f64,
    pub numeric_periods: u32,
    pub predicted_count: f64,
    pub predicted_valid: bool,
    pub predicted_oscillatory: bool,
}

impl CountsReport {
    fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "transfer_blue,capacity_red,numeric_periods,predicted_count,predicted_valid,predicted_oscillatory,agree"
        )?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                fmt_float(r.transfer_blue),
                fmt_float(r.capacity_red),
                r.numeric_periods,
                fmt_float(r.predicted_count),
                r.predicted_valid as u8,
                r.predicted_oscillatory as u8,
                ((r.numeric_periods >= 1) == r.predicted_oscillatory) as u8,
            )?;
        }
        Ok(())
    }
}

fn default_counts_grid() -> SweepAxes {
    SweepAxes {
        axis_x: AxisSpec { param: "transfer_blue".into(), min: 0.0, max: 3.5, points: 24 },
        axis_y: AxisSpec { param: "capacity_red".into(), min: 0.5, max: 3.0, points: 24 },
    }
}

fn oscillation_counts(cfg: &RunConfig, workers: usize) -> Result<CountsReport, CompareError> {
    let grid = cfg.compare.as_ref().and_then(|c| c.grid.clone()).unwrap_or_else(default_counts_grid);
    let spec = SweepSpec {
        model: Model::ReducedContributor,
        axis_x: grid.axis_x,
        axis_y: grid.axis_y,
        params: cfg.params,
        initial: cfg.initial,
        integrator: cfg.integrator,
        report: cfg.report,
    };
    let result = run_sweep(&spec, workers).map_err(|e| CompareError::Config(e.to_string()))?;

    let red_supporters0 = cfg.initial.red_supporters;
    let neutral0 = cfg.initial.neutral;
    let mut rows = Vec::with_capacity(result.records.len());
    let mut agreeing = 0usize;
    let mut diff_sum = 0.0;
    let mut diff_n = 0usize;
    for r in &result.records {
        let count = theory::oscillation_count(red_supporters0, neutral0, r.x, r.y);
        let oscillatory = theory::oscillation_condition(r.x, r.y, neutral0);
        if (r.periods >= 1) == oscillatory {
            agreeing += 1;
        }
        if count.valid {
            diff_sum += (r.periods as f64 - count.value).abs();
            diff_n += 1;
        }
        rows.push(CountsRow {
            transfer_blue: r.x,
            capacity_red: r.y,
            numeric_periods: r.periods,
            predicted_count: count.value,
            predicted_valid: count.valid,
            predicted_oscillatory: oscillatory,
        });
    }
    let total = rows.len();
    Ok(CountsReport {
        cells_total: total,
        cells_agreeing: agreeing,
        regime_agreement_fraction: agreeing as f64 / total as f64,
        mean_count_difference: if diff_n > 0 { diff_sum / diff_n as f64 } else { 0.0 },
        rows,
    })
}

// ---------------------------------------------------------------------------
// Reduced equivalence: full symmetric contributor model vs its reduction.

#[derive(Debug, Serialize)]
pub struct EquivalenceReport {
    pub sup_blue_difference: f64,
    /// End of the comparison window: first time any full-model population
    /// drops below the extinction threshold (or the configured end time).
    pub window_end: f64,
    pub samples_compared: usize,
    /// Fraction of window samples within the pinned tolerance.
    pub agreement_fraction: f64,
    pub tolerance: f64,
    #[serde(skip)]
    pub rows: Vec<(f64, f64, f64)>,
}

impl EquivalenceReport {
    fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,B_full,B_reduced,difference")?;
        for &(t, full, reduced) in &self.rows {
            writeln!(
                w,
                "{},{},{},{}",
                fmt_float(t),
                fmt_float(full),
                fmt_float(reduced),
                fmt_float(full - reduced),
            )?;
        }
        Ok(())
    }
}

/// Sup-norm tolerance pinned for full-vs-reduced equivalence.
pub const EQUIVALENCE_TOLERANCE: f64 = 1e-4;

fn symmetrized_params(params: &ModelParams) -> ModelParams {
    ModelParams {
        lethality_blue: params.lethality_red,
        transfer_red: params.transfer_blue,
        capacity_blue: params.capacity_red,
        ..*params
    }
}

fn check_numeric(termination: Termination, what: &str) -> Result<(), CompareError> {
    match termination {
        Termination::Diverged | Termination::StepFailure => {
            Err(CompareError::Numeric(format!("{what} terminated with {termination}")))
        }
        _ => Ok(()),
    }
}

fn reduced_equivalence(cfg: &RunConfig) -> Result<EquivalenceReport, CompareError> {
    require_symmetric_initial(&cfg.initial)?;
    let params = symmetrized_params(&cfg.params);
    let threshold = cfg.report.extinction_threshold;

    let full = Model::Contributor
        .run(&params, &cfg.initial, &cfg.integrator, threshold)
        .map_err(|e| CompareError::Config(e.to_string()))?;
    check_numeric(full.termination, "full contributor model")?;
    let reduced = Model::ReducedContributor
        .run(&params, &cfg.initial, &cfg.integrator, threshold)
        .map_err(|e| CompareError::Config(e.to_string()))?;
    check_numeric(reduced.termination, "reduced contributor system")?;

    let n = full.len().min(reduced.len());
    let mut sup = 0.0f64;
    let mut window_end = 0.0f64;
    let mut within = 0usize;
    let mut rows = Vec::new();
    for i in 0..n {
        let state = &full.states[i];
        if state.iter().any(|&v| v < threshold) && i > 0 {
            break;
        }
        let t = full.times[i];
        let b_full = state[BLUE];
        let b_reduced = reduced.states[i][BLUE];
        let diff = (b_full - b_reduced).abs();
        sup = sup.max(diff);
        if diff <= EQUIVALENCE_TOLERANCE {
            within += 1;
        }
        window_end = t;
        rows.push((t, b_full, b_reduced));
    }
    let samples = rows.len();
    Ok(EquivalenceReport {
        sup_blue_difference: sup,
        window_end,
        samples_compared: samples,
        agreement_fraction: if samples > 0 { within as f64 / samples as f64 } else { 0.0 },
        tolerance: EQUIVALENCE_TOLERANCE,
        rows,
    })
}

// ---------------------------------------------------------------------------
// Alpha ladder: perturbative system vs its three memory-variable forms.

#[derive(Debug, Serialize)]
pub struct LadderReport {
    /// Sup |alpha_dot(integro) - offset(perturbation)| over the whole run.
    pub sup_integro_difference: f64,
    /// Sup |alpha_dot(forced autonomous) - offset| over the whole run.
    pub sup_forced_difference: f64,
    /// Sup |alpha_dot(linearised) - offset| up to the stalemate timescale.
    pub sup_linear_difference: f64,
    pub stalemate_timescale: f64,
    /// Agreement bound for the exact memory form: 10 x rel_tol.
    pub tolerance_bound: f64,
    /// Fraction of samples where the memory form stays within the bound.
    pub agreement_fraction: f64,
    pub samples_compared: usize,
    #[serde(skip)]
    pub rows: Vec<[f64; 5]>,
}

impl LadderReport {
    fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,offset_perturbation,alpha_dot_integro,alpha_dot_forced,alpha_dot_linear")?;
        for row in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{}",
                fmt_float(row[0]),
                fmt_float(row[1]),
                fmt_float(row[2]),
                fmt_float(row[3]),
                fmt_float(row[4]),
            )?;
        }
        Ok(())
    }
}

fn alpha_ladder(cfg: &RunConfig) -> Result<LadderReport, CompareError> {
    let kt = cfg.params.transfer_blue;
    let kc = cfg.params.capacity_red;
    let system = AlphaSystem {
        transfer_blue: kt,
        capacity_red: kc,
        red_supporters0: cfg.initial.red_supporters,
        neutral0: cfg.initial.neutral,
    };
    let offset0 = cfg.initial.blue - kc;

    let start = PerturbationState {
        offset: offset0,
        red_supporters: cfg.initial.red_supporters,
        neutral: cfg.initial.neutral,
    };
    let perturbation = integrate(
        |_t, y: &[f64; 3]| models::perturbation_rhs(y, kt, kc),
        start.as_array(),
        &cfg.integrator,
    )
    .map_err(|e| CompareError::Config(e.to_string()))?;
    check_numeric(perturbation.termination, "perturbation system")?;

    let integro = integrate(|t, y| system.integro_rhs(t, y), [0.0, offset0, 0.0], &cfg.integrator)
        .map_err(|e| CompareError::Config(e.to_string()))?;
    check_numeric(integro.termination, "memory (integro-differential) system")?;

    let forced =
        integrate(|t, y| system.forced_autonomous_rhs(t, y), [0.0, offset0, 0.0], &cfg.integrator)
            .map_err(|e| CompareError::Config(e.to_string()))?;
    check_numeric(forced.termination, "forced autonomous system")?;

    let linear = integrate(|t, y| system.linear_rhs(t, y), [0.0, offset0], &cfg.integrator)
        .map_err(|e| CompareError::Config(e.to_string()))?;
    check_numeric(linear.termination, "linearised system")?;

    let t_f = theory::stalemate_timescale(cfg.initial.red_supporters, cfg.initial.neutral, kc);
    let bound = 10.0 * cfg.integrator.rel_tol;

    let n = perturbation.len().min(integro.len()).min(forced.len()).min(linear.len());
    let mut sup_integro = 0.0f64;
    let mut sup_forced = 0.0f64;
    let mut sup_linear = 0.0f64;
    let mut within = 0usize;
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let t = perturbation.times[i];
        let eps = PerturbationState::from_array(&perturbation.states[i]).offset;
        let d_integro = AlphaState::from_array(&integro.states[i]).alpha_dot;
        let d_forced = AlphaState::from_array(&forced.states[i]).alpha_dot;
        let d_linear = linear.states[i][1];
        sup_integro = sup_integro.max((d_integro - eps).abs());
        sup_forced = sup_forced.max((d_forced - eps).abs());
        if t <= t_f {
            sup_linear = sup_linear.max((d_linear - eps).abs());
        }
        if (d_integro - eps).abs() <= bound {
            within += 1;
        }
        rows.push([t, eps, d_integro, d_forced, d_linear]);
    }

    Ok(LadderReport {
        sup_integro_difference: sup_integro,
        sup_forced_difference: sup_forced,
        sup_linear_difference: sup_linear,
        stalemate_timescale: t_f,
        tolerance_bound: bound,
        agreement_fraction: if n > 0 { within as f64 / n as f64 } else { 0.0 },
        samples_compared: n,
        rows,
    })
}
