//! TOML run configuration for `sim`.
//!
//! All rates in the file are in units of the guided decay rate; `gamma`
//! itself should normally stay at 1 (the tool warns otherwise). Every
//! section is optional and falls back to documented defaults; unknown keys
//! are rejected so typos surface as config errors.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use vqed_core::{CavityConfig, SystemParams, TimeBinConfig};

use crate::AppError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Optional mode pin; when present it must match the subcommand.
    pub mode: Option<String>,
    pub params: SystemParams,
    pub cavity: CavityConfig,
    pub mps: TimeBinConfig,
    pub evolve: EvolveConfig,
    pub sweep: SweepConfig,
    pub checkpoint: CheckpointConfig,
    pub output: OutputConfig,
}

/// Settings for the Markov time-evolution mode.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveConfig {
    /// Integrator step, in units of `1/gamma`.
    pub dt: f64,
    /// Final time, in units of `1/gamma`.
    pub t_final: f64,
    /// Record every `stride`-th step.
    pub stride: usize,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            dt: 0.005,
            t_final: 100.0,
            stride: 10,
        }
    }
}

/// One sweep axis: a `SystemParams` field scanned over a uniform grid.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub name: String,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl AxisConfig {
    pub fn values(&self) -> Vec<f64> {
        let n = self.points.max(2);
        (0..n)
            .map(|i| self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: Vec<AxisConfig>,
}

/// Saving/restoring time-bin solver state.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckpointConfig {
    /// Write the final solver state here.
    pub save: Option<PathBuf>,
    /// Start from this saved state instead of the vacuum. Structural solver
    /// settings (bin length, cutoff, truncation) come from the checkpoint;
    /// `[mps]` still controls the new horizon and sampling.
    pub resume: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    /// `csv` or `jsonl`.
    pub format: Option<String>,
}

/// Fields a sweep axis may scan.
pub const SWEEPABLE: [&str; 8] = [
    "omega",
    "gamma_prime",
    "delta1",
    "delta2",
    "dphi",
    "phi_prime",
    "tau",
    "eta",
];

/// Set one named field on a copy of `p`.
pub fn with_field(p: &SystemParams, name: &str, value: f64) -> Option<SystemParams> {
    let mut q = *p;
    match name {
        "omega" => q.omega = value,
        "gamma_prime" => q.gamma_prime = value,
        "delta1" => q.delta1 = value,
        "delta2" => q.delta2 = value,
        "dphi" => q.dphi = value,
        "phi_prime" => q.phi_prime = value,
        "tau" => q.tau = value,
        "eta" => q.eta = value,
        _ => return None,
    }
    Some(q)
}

pub fn load(path: &Path, mode: &str) -> Result<RunConfig, AppError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        AppError::Config(format!("cannot read config {}: {e}", path.display()))
    })?;
    let cfg: RunConfig = toml::from_str(&text).map_err(|e| {
        // toml errors carry line/column context in their Display output
        AppError::Config(format!("{}: {e}", path.display()))
    })?;
    if let Some(pinned) = &cfg.mode {
        if pinned != mode {
            return Err(AppError::Config(format!(
                "config pins mode = \"{pinned}\" but the command line asked for \"{mode}\""
            )));
        }
    }
    cfg.params
        .validate()
        .map_err(|e| AppError::Config(format!("[params] {e}")))?;
    for ax in &cfg.sweep.axis {
        if !SWEEPABLE.contains(&ax.name.as_str()) {
            return Err(AppError::Config(format!(
                "[sweep] unknown axis \"{}\"; valid fields: {}",
                ax.name,
                SWEEPABLE.join(", ")
            )));
        }
        if ax.points < 2 {
            return Err(AppError::Config(format!(
                "[sweep] axis \"{}\" needs at least 2 points, got {}",
                ax.name, ax.points
            )));
        }
        if !ax.start.is_finite() || !ax.stop.is_finite() {
            return Err(AppError::Config(format!(
                "[sweep] axis \"{}\" has non-finite bounds",
                ax.name
            )));
        }
    }
    if !(cfg.evolve.dt > 0.0) || !(cfg.evolve.t_final > 0.0) || cfg.evolve.stride == 0 {
        return Err(AppError::Config(
            "[evolve] dt and t_final must be > 0 and stride >= 1".into(),
        ));
    }
    if (cfg.params.gamma - 1.0).abs() > 1e-12 {
        log::warn!(
            "gamma = {} — rates are meant in units of gamma; results are \
             consistent but not in the reference units",
            cfg.params.gamma
        );
    }
    Ok(cfg)
}
