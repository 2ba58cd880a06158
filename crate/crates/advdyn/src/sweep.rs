//! Parallel two-parameter grid scans producing phase-diagram data.
//!
//! Cells are independent integrations. The grid is split into contiguous
//! chunks, one per worker, and results are written into a preallocated
//! row-major buffer, so output is identical for any worker count.

use crate::analysis::{classify_outcome, count_periods, OutcomeKind, StateComponent};
use crate::core::{ModelParams, PopulationState, ValidationError};
use crate::integrator::{IntegratorConfig, Termination};
use crate::models::Model;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("unknown sweep parameter `{0}`")]
    UnknownParameter(String),
    #[error("axis `{axis}` invalid: {reason}")]
    InvalidAxis { axis: &'static str, reason: String },
    #[error("cell (x = {x}, y = {y}) has invalid inputs: {source}")]
    InvalidCell { x: f64, y: f64, source: ValidationError },
    #[error(transparent)]
    Integrator(#[from] crate::integrator::IntegratorError),
}

/// One swept parameter: `points` values at cell centres of `(min, max)`,
/// so the open interval endpoints are never sampled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub param: String,
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl AxisSpec {
    pub fn values(&self) -> Vec<f64> {
        let width = (self.max - self.min) / self.points as f64;
        (0..self.points).map(|i| self.min + (i as f64 + 0.5) * width).collect()
    }

    fn validate(&self, axis: &'static str) -> Result<ParamTarget, SweepError> {
        if self.points < 2 {
            return Err(SweepError::InvalidAxis {
                axis,
                reason: format!("needs at least 2 points, got {}", self.points),
            });
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(SweepError::InvalidAxis {
                axis,
                reason: format!("needs finite min < max, got [{}, {}]", self.min, self.max),
            });
        }
        resolve_param(&self.param)
    }
}

/// Model parameters and initial-condition fields addressable by sweep axes.
/// The `*_both` targets tie the red and blue coefficients together, which
/// the symmetric near-peer scans rely on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamTarget {
    LethalityRed,
    LethalityBlue,
    LethalityBoth,
    TransferBlue,
    TransferRed,
    TransferBoth,
    CapacityRed,
    CapacityBlue,
    CapacityBoth,
    StandingPopulation,
    InitialBlue,
    InitialRed,
    InitialRedSupporters,
    InitialBlueSupporters,
    InitialNeutral,
}

pub fn resolve_param(name: &str) -> Result<ParamTarget, SweepError> {
    use ParamTarget::*;
    Ok(match name {
        "lethality_red" => LethalityRed,
        "lethality_blue" => LethalityBlue,
        "lethality" => LethalityBoth,
        "transfer_blue" => TransferBlue,
        "transfer_red" => TransferRed,
        "transfer" => TransferBoth,
        "capacity_red" => CapacityRed,
        "capacity_blue" => CapacityBlue,
        "capacity" => CapacityBoth,
        "standing_population" => StandingPopulation,
        "blue" => InitialBlue,
        "red" => InitialRed,
        "red_supporters" => InitialRedSupporters,
        "blue_supporters" => InitialBlueSupporters,
        "neutral" => InitialNeutral,
        other => return Err(SweepError::UnknownParameter(other.to_string())),
    })
}

fn apply_param(target: ParamTarget, value: f64, params: &mut ModelParams, initial: &mut PopulationState) {
    use ParamTarget::*;
    match target {
        LethalityRed => params.lethality_red = value,
        LethalityBlue => params.lethality_blue = value,
        LethalityBoth => {
            params.lethality_red = value;
            params.lethality_blue = value;
        }
        TransferBlue => params.transfer_blue = value,
        TransferRed => params.transfer_red = value,
        TransferBoth => {
            params.transfer_blue = value;
            params.transfer_red = value;
        }
        CapacityRed => params.capacity_red = value,
        CapacityBlue => params.capacity_blue = value,
        CapacityBoth => {
            params.capacity_red = value;
            params.capacity_blue = value;
        }
        StandingPopulation => params.standing_population = value,
        InitialBlue => initial.blue = value,
        InitialRed => initial.red = value,
        InitialRedSupporters => initial.red_supporters = value,
        InitialBlueSupporters => initial.blue_supporters = value,
        InitialNeutral => initial.neutral = value,
    }
}

/// Post-processing knobs applied to each cell's trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReportOptions {
    pub draw_threshold: f64,
    pub extinction_threshold: f64,
    pub period_component: StateComponent,
    /// Reference level for period counting; defaults to the carrying
    /// capacity of the selected component's side in each cell.
    pub period_reference: Option<f64>,
    /// Prominence floor for period counting; defaults to 1e-3 times the
    /// side's carrying capacity.
    pub prominence_floor: Option<f64>,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            draw_threshold: 1e-3,
            extinction_threshold: 1e-3,
            period_component: StateComponent::Red,
            period_reference: None,
            prominence_floor: None,
        }
    }
}

impl ReportOptions {
    /// Reference level and prominence floor for a cell with the given
    /// applied parameters.
    pub fn period_levels(&self, params: &ModelParams, initial: &PopulationState) -> (f64, f64) {
        let side_scale = match self.period_component {
            StateComponent::Red | StateComponent::RedSupporters => params.capacity_red,
            StateComponent::Blue | StateComponent::BlueSupporters => params.capacity_blue,
            StateComponent::Neutral => initial.neutral,
        };
        let reference = self.period_reference.unwrap_or(side_scale);
        let floor = self.prominence_floor.unwrap_or(1e-3 * side_scale.abs());
        (reference, floor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub model: Model,
    pub axis_x: AxisSpec,
    pub axis_y: AxisSpec,
    #[serde(default)]
    pub params: ModelParams,
    pub initial: PopulationState,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub report: ReportOptions,
}

/// Outcome of one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub x: f64,
    pub y: f64,
    pub final_state: PopulationState,
    pub outcome: Option<OutcomeKind>,
    pub margin: f64,
    pub periods: u32,
    pub termination: Termination,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub x_values: Vec<f64>,
    pub y_values: Vec<f64>,
    /// Row-major: index = iy * points_x + ix.
    pub records: Vec<CellRecord>,
    /// Flat index pairs of neighbouring cells whose margin changes sign.
    pub boundary_cells: Vec<(usize, usize)>,
}

impl SweepResult {
    pub fn record(&self, ix: usize, iy: usize) -> &CellRecord {
        &self.records[iy * self.x_values.len() + ix]
    }

    /// CSV rows in record order. Floats carry 17 significant digits.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,y,B,R,g,gamma,Gamma,G,outcome,margin,periods,termination")?;
        for r in &self.records {
            let s = &r.final_state;
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                fmt_float(r.x),
                fmt_float(r.y),
                fmt_float(s.blue),
                fmt_float(s.red),
                fmt_float(s.red_supporters),
                fmt_float(s.blue_supporters),
                fmt_float(s.neutral),
                fmt_float(s.total_green()),
                r.outcome.map_or("none", |o| o.label()),
                fmt_float(r.margin),
                r.periods,
                r.termination,
            )?;
        }
        Ok(())
    }
}

use crate::integrator::fmt_float;

/// Run every grid cell to the configured end time and classify the results.
/// Deterministic: the outcome is identical for any `workers` count.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<SweepResult, SweepError> {
    let target_x = spec.axis_x.validate("axis_x")?;
    let target_y = spec.axis_y.validate("axis_y")?;
    spec.integrator.validate()?;

    let x_values = spec.axis_x.values();
    let y_values = spec.axis_y.values();

    let cell_inputs = |x: f64, y: f64| -> (ModelParams, PopulationState) {
        let mut params = spec.params;
        let mut initial = spec.initial;
        apply_param(target_x, x, &mut params, &mut initial);
        apply_param(target_y, y, &mut params, &mut initial);
        (params, initial)
    };

    // Cheap upfront validation of every cell so bad axis ranges surface as
    // configuration errors instead of mid-sweep failures.
    for &y in &y_values {
        for &x in &x_values {
            let (params, initial) = cell_inputs(x, y);
            if let Err(source) = params.validate().and_then(|_| initial.validate()) {
                return Err(SweepError::InvalidCell { x, y, source });
            }
        }
    }

    let n_cells = x_values.len() * y_values.len();
    let mut cells: Vec<Option<CellRecord>> = vec![None; n_cells];
    let workers = workers.max(1).min(n_cells);
    let chunk_len = n_cells.div_ceil(workers);

    std::thread::scope(|scope| {
        for (chunk_idx, chunk) in cells.chunks_mut(chunk_len).enumerate() {
            let x_values = &x_values;
            let y_values = &y_values;
            let cell_inputs = &cell_inputs;
            scope.spawn(move || {
                let base = chunk_idx * chunk_len;
                for (offset, slot) in chunk.iter_mut().enumerate() {
                    let flat = base + offset;
                    let ix = flat % x_values.len();
                    let iy = flat / x_values.len();
                    let (x, y) = (x_values[ix], y_values[iy]);
                    let (params, initial) = cell_inputs(x, y);
                    *slot = Some(run_cell(spec, &params, &initial, x, y));
                }
            });
        }
    });

    let records: Vec<CellRecord> = cells.into_iter().map(|c| c.expect("cell computed")).collect();
    let boundary_cells = margin_sign_changes(&records, x_values.len(), y_values.len());
    Ok(SweepResult { spec: spec.clone(), x_values, y_values, records, boundary_cells })
}

fn run_cell(
    spec: &SweepSpec,
    params: &ModelParams,
    initial: &PopulationState,
    x: f64,
    y: f64,
) -> CellRecord {
    let traj = match spec.model.run(params, initial, &spec.integrator, spec.report.extinction_threshold)
    {
        Ok(t) => t,
        Err(_) => {
            // Pre-validated inputs make this unreachable in practice; record
            // the cell as failed rather than aborting the sweep.
            return CellRecord {
                x,
                y,
                final_state: *initial,
                outcome: None,
                margin: f64::NAN,
                periods: 0,
                termination: Termination::StepFailure,
            };
        }
    };

    let (reference, floor) = spec.report.period_levels(params, initial);
    let periods = count_periods(&traj, spec.report.period_component, reference, floor);
    let final_state = PopulationState::from_array(traj.final_state().expect("nonempty trajectory"));
    match classify_outcome(&traj, spec.report.draw_threshold) {
        Ok(outcome) => CellRecord {
            x,
            y,
            final_state,
            outcome: Some(outcome.kind),
            margin: outcome.margin,
            periods,
            termination: traj.termination,
        },
        Err(_) => CellRecord {
            x,
            y,
            final_state,
            outcome: None,
            margin: f64::NAN,
            periods,
            termination: traj.termination,
        },
    }
}

fn sign_class(margin: f64) -> i8 {
    if margin > 0.0 {
        1
    } else if margin < 0.0 {
        -1
    } else {
        0
    }
}

fn margin_sign_changes(records: &[CellRecord], nx: usize, ny: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    let idx = |ix: usize, iy: usize| iy * nx + ix;
    for iy in 0..ny {
        for ix in 0..nx {
            let a = idx(ix, iy);
            if records[a].margin.is_nan() {
                continue;
            }
            for (jx, jy) in [(ix + 1, iy), (ix, iy + 1)] {
                if jx >= nx || jy >= ny {
                    continue;
                }
                let b = idx(jx, jy);
                if records[b].margin.is_nan() {
                    continue;
                }
                if sign_class(records[a].margin) != sign_class(records[b].margin) {
                    pairs.push((a, b));
                }
            }
        }
    }
    pairs
}

/// Midpoints of grid edges across which the victory margin changes sign,
/// ready to overlay against an analytic boundary curve.
pub fn extract_boundary(result: &SweepResult) -> Vec<(f64, f64)> {
    result
        .boundary_cells
        .iter()
        .map(|&(a, b)| {
            let (ra, rb) = (&result.records[a], &result.records[b]);
            (0.5 * (ra.x + rb.x), 0.5 * (ra.y + rb.y))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_symmetric_spec() -> SweepSpec {
        SweepSpec {
            model: Model::Supporter,
            axis_x: AxisSpec { param: "lethality".into(), min: 0.0, max: 2.0, points: 2 },
            axis_y: AxisSpec { param: "capacity".into(), min: 0.5, max: 2.5, points: 2 },
            params: ModelParams::default(),
            initial: PopulationState::new(1.5, 1.5, 1.0, 1.0, 3.0),
            integrator: IntegratorConfig { t_end: 5.0, sample_interval: 0.05, ..Default::default() },
            report: ReportOptions::default(),
        }
    }

    #[test]
    fn axis_values_sample_cell_centres() {
        let axis = AxisSpec { param: "capacity_red".into(), min: 0.0, max: 2.0, points: 4 };
        let v = axis.values();
        assert_eq!(v, vec![0.25, 0.75, 1.25, 1.75]);
    }

    #[test]
    fn unknown_parameter_is_rejected() {
        let mut spec = tiny_symmetric_spec();
        spec.axis_x.param = "lethality_purple".into();
        match run_sweep(&spec, 1) {
            Err(SweepError::UnknownParameter(name)) => assert_eq!(name, "lethality_purple"),
            other => panic!("expected unknown parameter, got {other:?}"),
        }
    }

    #[test]
    fn invalid_cells_surface_as_config_errors() {
        let mut spec = tiny_symmetric_spec();
        spec.axis_y = AxisSpec { param: "capacity".into(), min: -1.0, max: 1.0, points: 2 };
        assert!(matches!(run_sweep(&spec, 1), Err(SweepError::InvalidCell { .. })));
    }

    #[test]
    fn symmetric_grid_is_all_draws() {
        let result = run_sweep(&tiny_symmetric_spec(), 1).unwrap();
        assert_eq!(result.records.len(), 4);
        for r in &result.records {
            assert_eq!(r.outcome, Some(OutcomeKind::Draw), "cell ({}, {})", r.x, r.y);
            assert_eq!(r.margin, 0.0);
        }
        assert!(result.boundary_cells.is_empty());
        assert!(extract_boundary(&result).is_empty());
    }

    #[test]
    fn worker_count_does_not_change_records() {
        let mut spec = tiny_symmetric_spec();
        spec.axis_x = AxisSpec { param: "lethality_red".into(), min: 0.0, max: 4.0, points: 3 };
        spec.axis_y = AxisSpec { param: "capacity_red".into(), min: 0.4, max: 2.4, points: 3 };
        let a = run_sweep(&spec, 1).unwrap();
        let b = run_sweep(&spec, 4).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.boundary_cells, b.boundary_cells);
    }

    #[test]
    fn records_are_row_major() {
        let result = run_sweep(&tiny_symmetric_spec(), 2).unwrap();
        let xs: Vec<f64> = result.records.iter().map(|r| r.x).collect();
        assert_eq!(xs, vec![0.5, 1.5, 0.5, 1.5]);
        let ys: Vec<f64> = result.records.iter().map(|r| r.y).collect();
        assert_eq!(ys, vec![1.0, 1.0, 2.0, 2.0]);
    }

    #[test]
    fn synthetic_margin_boundary_lands_within_a_cell() {
        // Margin field x - 1 on x in (0, 2): boundary near x = 1.
        let spec = tiny_symmetric_spec();
        let nx = 10;
        let axis = AxisSpec { param: "x".into(), min: 0.0, max: 2.0, points: nx };
        let x_values = axis.values();
        let records: Vec<CellRecord> = x_values
            .iter()
            .map(|&x| CellRecord {
                x,
                y: 0.5,
                final_state: spec.initial,
                outcome: None,
                margin: x - 1.0,
                periods: 0,
                termination: Termination::ReachedEnd,
            })
            .collect();
        let boundary_cells = margin_sign_changes(&records, nx, 1);
        let result = SweepResult {
            spec,
            x_values,
            y_values: vec![0.5],
            records,
            boundary_cells,
        };
        let pts = extract_boundary(&result);
        assert_eq!(pts.len(), 1);
        let cell_width = 2.0 / nx as f64;
        assert!((pts[0].0 - 1.0).abs() <= cell_width, "boundary at {}", pts[0].0);
    }

    #[test]
    fn near_parity_period_sweep_stays_in_single_digits() {
        // Full contributor scan around coefficient parity at 1.2: the
        // back-and-forth region produces small completed-period counts, with
        // at least one oscillating cell and nothing past seven periods.
        let spec = SweepSpec {
            model: Model::Contributor,
            axis_x: AxisSpec { param: "transfer_blue".into(), min: 0.0, max: 3.5, points: 6 },
            axis_y: AxisSpec { param: "capacity_red".into(), min: 0.9, max: 1.4, points: 5 },
            params: ModelParams { transfer_red: 1.2, capacity_blue: 1.2, ..Default::default() },
            initial: PopulationState::new(20.0, 20.0, 10.0, 10.0, 10.0),
            integrator: IntegratorConfig::default(),
            report: ReportOptions::default(),
        };
        let result = run_sweep(&spec, 2).unwrap();
        let max = result.records.iter().map(|r| r.periods).max().unwrap();
        assert!(max <= 7, "period count {max} out of range");
        assert!(result.records.iter().any(|r| r.periods >= 1));
    }

    #[test]
    fn swapping_roles_mirrors_the_outcome_map() {
        // Sweeping red's coefficients with asymmetric initial forces, then
        // blue's coefficients with the mirrored state, must produce the
        // mirror-image map with exactly negated margins.
        let initial = PopulationState::new(2.0, 1.0, 1.0, 2.0, 3.0);
        let mirrored = PopulationState::new(1.0, 2.0, 2.0, 1.0, 3.0);
        let integrator = IntegratorConfig { t_end: 8.0, sample_interval: 0.05, ..Default::default() };
        let red_axes = (
            AxisSpec { param: "lethality_red".into(), min: 0.0, max: 6.0, points: 4 },
            AxisSpec { param: "capacity_red".into(), min: 0.3, max: 1.8, points: 4 },
        );
        let blue_axes = (
            AxisSpec { param: "lethality_blue".into(), min: 0.0, max: 6.0, points: 4 },
            AxisSpec { param: "capacity_blue".into(), min: 0.3, max: 1.8, points: 4 },
        );
        let spec_red = SweepSpec {
            model: Model::Supporter,
            axis_x: red_axes.0,
            axis_y: red_axes.1,
            params: ModelParams::default(),
            initial,
            integrator,
            report: ReportOptions::default(),
        };
        let spec_blue = SweepSpec {
            axis_x: blue_axes.0,
            axis_y: blue_axes.1,
            initial: mirrored,
            ..spec_red.clone()
        };
        let a = run_sweep(&spec_red, 2).unwrap();
        let b = run_sweep(&spec_blue, 2).unwrap();
        for (ra, rb) in a.records.iter().zip(&b.records) {
            assert_eq!(ra.margin, -rb.margin, "cell ({}, {})", ra.x, ra.y);
            let mirrored_outcome = rb.outcome.map(|o| match o {
                OutcomeKind::BlueVictory => OutcomeKind::RedVictory,
                OutcomeKind::RedVictory => OutcomeKind::BlueVictory,
                OutcomeKind::Draw => OutcomeKind::Draw,
            });
            assert_eq!(ra.outcome, mirrored_outcome);
        }
    }

    #[test]
    fn refinement_agrees_where_fine_neighbours_agree() {
        // Away from razor-thin features, a coarse cell whose four fine
        // sub-cells classify identically must classify the same way.
        let base = SweepSpec {
            model: Model::Supporter,
            axis_x: AxisSpec { param: "lethality_red".into(), min: 8.0, max: 20.0, points: 10 },
            axis_y: AxisSpec { param: "capacity_red".into(), min: 0.4, max: 1.0, points: 10 },
            params: ModelParams::default(),
            initial: PopulationState::new(1.5, 1.5, 1.0, 2.0, 3.0),
            integrator: IntegratorConfig::default(),
            report: ReportOptions::default(),
        };
        let mut fine = base.clone();
        fine.axis_x.points = 20;
        fine.axis_y.points = 20;
        let coarse_result = run_sweep(&base, 2).unwrap();
        let fine_result = run_sweep(&fine, 2).unwrap();

        let mut quads_checked = 0;
        for iy in 0..10 {
            for ix in 0..10 {
                let corners = [
                    fine_result.record(2 * ix, 2 * iy).outcome,
                    fine_result.record(2 * ix + 1, 2 * iy).outcome,
                    fine_result.record(2 * ix, 2 * iy + 1).outcome,
                    fine_result.record(2 * ix + 1, 2 * iy + 1).outcome,
                ];
                if corners.iter().all(|&o| o == corners[0]) {
                    assert_eq!(
                        coarse_result.record(ix, iy).outcome,
                        corners[0],
                        "cell ({}, {})",
                        coarse_result.record(ix, iy).x,
                        coarse_result.record(ix, iy).y
                    );
                    quads_checked += 1;
                }
            }
        }
        assert!(quads_checked > 50, "only {quads_checked} agreeing quads");
    }

    #[test]
    fn csv_has_header_and_one_row_per_cell() {
        let result = run_sweep(&tiny_symmetric_spec(), 2).unwrap();
        let mut buf = Vec::new();
        result.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], "x,y,B,R,g,gamma,Gamma,G,outcome,margin,periods,termination");
        assert!(lines[1].contains("draw"));
        assert!(lines[1].ends_with("reached_t_end"));
    }
}
