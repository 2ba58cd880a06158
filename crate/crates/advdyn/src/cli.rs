//! Subcommand implementations behind the `advdyn` binary: configuration
//! resolution, run execution, and file emission.
//!
//! Exit codes: 0 success, 2 configuration or domain error, 3 numeric
//! failure. Every run is deterministic; there is no randomness to seed.

use crate::analysis::{classify_outcome, count_periods, green_decay_residual, conservation_residual};
use crate::compare::{run_compare, CompareError};
use crate::config::{ConfigError, RunConfig};
use crate::integrator::{detect_extinction, Termination};
use crate::models::Model;
use crate::sweep::run_sweep;
use crate::theory;
use serde_json::json;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use thiserror::Error;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

#[derive(Debug, Clone)]
pub struct CliOptions {
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    pub workers: Option<usize>,
    pub model: Option<String>,
    pub t_end: Option<f64>,
    pub seedless: bool,
}

impl Default for CliOptions {
    fn default() -> Self {
        Self {
            config: None,
            out: PathBuf::from("."),
            workers: None,
            model: None,
            t_end: None,
            seedless: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Simulate,
    Sweep,
    Predict,
    Compare,
}

/// Run one subcommand and map failures onto the exit-code contract.
pub fn run(cmd: Subcommand, opts: &CliOptions) -> i32 {
    let result = match cmd {
        Subcommand::Simulate => cmd_simulate(opts),
        Subcommand::Sweep => cmd_sweep(opts),
        Subcommand::Predict => cmd_predict(opts),
        Subcommand::Compare => cmd_compare(opts),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("advdyn: error: {e}");
            e.exit_code()
        }
    }
}

/// Worker-count resolution: `--workers` flag, then the ADVDYN_WORKERS
/// environment variable, then the machine's available parallelism.
pub fn resolve_workers(flag: Option<usize>) -> usize {
    flag.filter(|&w| w > 0)
        .or_else(|| std::env::var("ADVDYN_WORKERS").ok().and_then(|s| s.parse().ok()))
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn load_config(opts: &CliOptions) -> Result<RunConfig, CliError> {
    let path = opts
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("no configuration given: pass --config PATH".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(model) = &opts.model {
        let model = Model::from_str(model).map_err(CliError::Config)?;
        cfg.model = Some(model);
    }
    if let Some(t_end) = opts.t_end {
        cfg.integrator.t_end = t_end;
        cfg.integrator.validate().map_err(|e| CliError::Config(e.to_string()))?;
    }
    cfg.meta = None;
    Ok(cfg)
}

fn ensure_out_dir(opts: &CliOptions) -> Result<(), CliError> {
    std::fs::create_dir_all(&opts.out)
        .map_err(|e| CliError::Config(format!("cannot create output directory {}: {e}", opts.out.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

/// Integrate one trajectory, write `trajectory.csv` and `summary.json`.
pub fn cmd_simulate(opts: &CliOptions) -> Result<(), CliError> {
    let cfg = load_config(opts)?;
    ensure_out_dir(opts)?;
    let model = cfg.require_model()?;

    let traj = model
        .run(&cfg.params, &cfg.initial, &cfg.integrator, cfg.report.extinction_threshold)
        .map_err(|e| CliError::Config(e.to_string()))?;

    let mut csv = Vec::new();
    traj.write_population_csv(&mut csv)
        .map_err(|e| CliError::Config(format!("cannot render trajectory: {e}")))?;
    write_text(&opts.out.join("trajectory.csv"), &String::from_utf8(csv).expect("csv is utf8"))?;

    let outcome = classify_outcome(&traj, cfg.report.draw_threshold).ok();
    let (reference, floor) = cfg.report.period_levels(&cfg.params, &cfg.initial);
    let periods = count_periods(&traj, cfg.report.period_component, reference, floor);
    let extinction = detect_extinction(&traj, cfg.report.extinction_threshold);
    let decay_residual = match model {
        Model::Contributor | Model::ReducedContributor => {
            green_decay_residual(&traj, &cfg.params).ok()
        }
        Model::Supporter | Model::ReducedSupporter => None,
    };

    let summary = json!({
        "config": cfg.without_meta(),
        "version": VERSION,
        "termination": traj.termination,
        "final_time": traj.final_time(),
        "final_state": traj.final_state().map(crate::core::PopulationState::from_array),
        "outcome": outcome.as_ref().map(|o| o.kind.label()),
        "margin": outcome.as_ref().map(|o| o.margin),
        "periods": periods,
        "conservation_residual": conservation_residual(&traj),
        "green_decay_residual": decay_residual,
        "extinction": extinction.map(|(time, side)| json!({"time": time, "side": side})),
    });
    write_text(&opts.out.join("summary.json"), &pretty(&summary))?;

    println!(
        "simulate: model={} termination={} outcome={} periods={periods}",
        model.name(),
        traj.termination,
        outcome.as_ref().map_or("none", |o| o.kind.label()),
    );

    match traj.termination {
        Termination::Diverged | Termination::StepFailure => Err(CliError::Numeric(format!(
            "integration failed with {} at t = {:.6}",
            traj.termination,
            traj.final_time().unwrap_or(0.0)
        ))),
        _ => Ok(()),
    }
}

/// Run the configured grid scan, write `sweep.csv` and the `sweep.json`
/// sidecar echoing the resolved configuration.
pub fn cmd_sweep(opts: &CliOptions) -> Result<(), CliError> {
    let cfg = load_config(opts)?;
    ensure_out_dir(opts)?;
    let spec = cfg.sweep_spec()?;
    let workers = resolve_workers(opts.workers);

    let result = run_sweep(&spec, workers).map_err(|e| CliError::Config(e.to_string()))?;

    let mut csv = Vec::new();
    result.write_csv(&mut csv).map_err(|e| CliError::Config(format!("cannot render sweep: {e}")))?;
    write_text(&opts.out.join("sweep.csv"), &String::from_utf8(csv).expect("csv is utf8"))?;

    let failed = result
        .records
        .iter()
        .filter(|r| matches!(r.termination, Termination::Diverged | Termination::StepFailure))
        .count();
    let sidecar = json!({
        "config": cfg.without_meta(),
        "version": VERSION,
        "rows": result.records.len(),
        "boundary_edges": result.boundary_cells.len(),
        "failed_cells": failed,
    });
    write_text(&opts.out.join("sweep.json"), &pretty(&sidecar))?;

    println!(
        "sweep: {} cells ({} x {}), {} boundary edges, {} failed cells, workers={workers}",
        result.records.len(),
        result.x_values.len(),
        result.y_values.len(),
        result.boundary_cells.len(),
        failed,
    );
    Ok(())
}

/// Evaluate every closed-form predictor at the configured inputs.
pub fn cmd_predict(opts: &CliOptions) -> Result<(), CliError> {
    let cfg = load_config(opts)?;
    ensure_out_dir(opts)?;

    let blue0 = cfg.initial.blue;
    let red_supporters0 = cfg.initial.red_supporters;
    let neutral0 = cfg.initial.neutral;
    let total_green0 = cfg.initial.total_green();
    let lethality_red = cfg.params.lethality_red;
    let transfer_blue = cfg.params.transfer_blue;
    let capacity_red = cfg.params.capacity_red;

    let domain = |e: theory::TheoryError| CliError::Config(format!("domain error: {e}"));
    let rho = theory::rho(lethality_red, total_green0, red_supporters0).map_err(domain)?;
    let threshold_exact =
        theory::annihilation_threshold(blue0, lethality_red, total_green0, red_supporters0)
            .map_err(domain)?;
    let threshold_approx =
        theory::annihilation_threshold_approx(blue0, lethality_red, total_green0, red_supporters0)
            .map_err(domain)?;
    let t_f = theory::stalemate_timescale(red_supporters0, neutral0, capacity_red);
    let oscillatory = theory::oscillation_condition(transfer_blue, capacity_red, neutral0);
    let period = theory::oscillation_period(transfer_blue, capacity_red, neutral0);
    let count = theory::oscillation_count(red_supporters0, neutral0, transfer_blue, capacity_red);

    let output = json!({
        "config": cfg.without_meta(),
        "version": VERSION,
        "input": {
            "blue0": blue0,
            "red_supporters0": red_supporters0,
            "neutral0": neutral0,
            "total_green0": total_green0,
            "lethality_red": lethality_red,
            "transfer_blue": transfer_blue,
            "capacity_red": capacity_red,
        },
        "rho": rho,
        "threshold_exact": threshold_exact,
        "threshold_approx": threshold_approx,
        "t_f": t_f,
        "oscillatory": oscillatory,
        "period": period,
        "count": count,
    });
    let text = pretty(&output);
    write_text(&opts.out.join("predictions.json"), &text)?;
    println!("{text}");
    Ok(())
}

/// Run one numeric-vs-theory comparison, writing `compare.json` and
/// `compare.csv`.
pub fn cmd_compare(opts: &CliOptions) -> Result<(), CliError> {
    let cfg = load_config(opts)?;
    ensure_out_dir(opts)?;
    let workers = resolve_workers(opts.workers);

    let report = run_compare(&cfg, workers).map_err(|e| match e {
        CompareError::Config(msg) => CliError::Config(msg),
        CompareError::Numeric(msg) => CliError::Numeric(msg),
    })?;

    let mut csv = Vec::new();
    report.write_csv(&mut csv).map_err(|e| CliError::Config(format!("cannot render comparison: {e}")))?;
    write_text(&opts.out.join("compare.csv"), &String::from_utf8(csv).expect("csv is utf8"))?;

    let doc = json!({
        "config": cfg.without_meta(),
        "version": VERSION,
        "report": report,
    });
    write_text(&opts.out.join("compare.json"), &pretty(&doc))?;

    println!("{}", report.summary_line());
    Ok(())
}

fn pretty(value: &serde_json::Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text
}

impl FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "supporter" => Ok(Model::Supporter),
            "contributor" => Ok(Model::Contributor),
            "reduced_supporter" => Ok(Model::ReducedSupporter),
            "reduced_contributor" => Ok(Model::ReducedContributor),
            other => Err(format!(
                "unknown model `{other}` (expected supporter, contributor, reduced_supporter or reduced_contributor)"
            )),
        }
    }
}
