//! The single-document JSON configuration consumed by every subcommand.
//!
//! An emitted summary or sidecar nests the resolved configuration under a
//! `config` key; the loader accepts either form, so outputs round-trip as
//! inputs unchanged.

use crate::core::{ModelParams, PopulationState};
use crate::integrator::IntegratorConfig;
use crate::models::Model;
use crate::sweep::{AxisSpec, ReportOptions, SweepSpec};
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("config invalid: {0}")]
    Parse(String),
    #[error("config invalid: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxes {
    pub axis_x: AxisSpec,
    pub axis_y: AxisSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompareMode {
    AnnihilationBoundary,
    OscillationCounts,
    ReducedEquivalence,
    AlphaLadder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    pub mode: CompareMode,
    /// Grid override for the boundary and count comparisons.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<SweepAxes>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<Model>,
    #[serde(default)]
    pub params: ModelParams,
    pub initial: PopulationState,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub report: ReportOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepAxes>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareConfig>,
    /// Provenance written into emitted sidecars; ignored on input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    /// Parse a config document, descending into a `config` key when the
    /// document is an emitted summary or sidecar.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        let value = match value.get("config") {
            Some(inner) if inner.is_object() => inner.clone(),
            _ => value,
        };
        let cfg: RunConfig =
            serde_json::from_value(value).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.params.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        cfg.initial.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        cfg.integrator.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(cfg)
    }

    pub fn require_model(&self) -> Result<Model, ConfigError> {
        self.model.ok_or_else(|| {
            ConfigError::Invalid("no model selected: set `model` in the config or pass --model".into())
        })
    }

    /// Assemble the sweep specification for this config.
    pub fn sweep_spec(&self) -> Result<SweepSpec, ConfigError> {
        let axes = self
            .sweep
            .clone()
            .ok_or_else(|| ConfigError::Invalid("sweep subcommand needs a `sweep` section".into()))?;
        Ok(SweepSpec {
            model: self.require_model()?,
            axis_x: axes.axis_x,
            axis_y: axes.axis_y,
            params: self.params,
            initial: self.initial,
            integrator: self.integrator,
            report: self.report,
        })
    }

    /// Strip provenance so emitted documents embed a clean config.
    pub fn without_meta(&self) -> Self {
        let mut c = self.clone();
        c.meta = None;
        c
    }
}
