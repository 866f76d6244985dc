//! Configuration files for the subcommands. Every struct rejects unknown
//! keys so that a typo fails loudly instead of silently using a default.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;
use voterlab_core::model::ScheduleConfig;
use voterlab_core::ModelConfig;

use crate::AppError;

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, AppError> {
    let text = std::fs::read_to_string(path)
        .map_err(|err| AppError::Io(format!("cannot read {}: {err}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|err| AppError::Config(format!("bad configuration {}: {err}", path.display())))
}

/// Step count for a run: scheduled models carry it in the schedule
/// (`T`), everything else states it explicitly; stating both is fine
/// only when they agree.
pub fn resolve_steps(schedule: &Option<ScheduleConfig>, steps: Option<u32>) -> Result<u32, AppError> {
    match (schedule, steps) {
        (Some(sc), Some(explicit)) if explicit != sc.steps => Err(AppError::Config(format!(
            "steps = {explicit} disagrees with the schedule horizon T = {}",
            sc.steps
        ))),
        (Some(sc), _) => Ok(sc.steps),
        (None, Some(explicit)) => Ok(explicit),
        (None, None) => Err(AppError::Config("steps is required for this model".into())),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub name: String,
    #[serde(default)]
    pub b: Option<u32>,
    pub epsilon: f64,
    #[serde(default)]
    pub l: Option<u32>,
    #[serde(default)]
    pub offsets: Option<Vec<(i32, i32)>>,
    #[serde(default)]
    pub schedule: Option<ScheduleConfig>,
    #[serde(rename = "R")]
    pub side: u32,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub steps: Option<u32>,
    /// "all-plus" (default), "all-minus", or "file:<path>" with a grid
    /// snapshot whose side matches `R`.
    #[serde(default)]
    pub init: Option<String>,
    /// Optional path for a snapshot of the final grid.
    #[serde(default)]
    pub grid_out: Option<PathBuf>,
}

impl SimulateConfig {
    pub fn model(&self) -> ModelConfig {
        ModelConfig {
            name: self.name.clone(),
            b: self.b,
            epsilon: self.epsilon,
            l: self.l,
            offsets: self.offsets.clone(),
            schedule: self.schedule.clone(),
            side: self.side,
            seed: self.seed,
        }
    }
}

fn default_replicas() -> u32 {
    8
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub name: String,
    #[serde(default)]
    pub b: Option<u32>,
    #[serde(default)]
    pub l: Option<u32>,
    #[serde(default)]
    pub offsets: Option<Vec<(i32, i32)>>,
    #[serde(default)]
    pub schedule: Option<ScheduleConfig>,
    #[serde(rename = "R")]
    pub side: u32,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub steps: Option<u32>,
    /// Error rates to sweep; each gets the same replica seeds, so rows
    /// are comparable point to point.
    pub epsilons: Vec<f64>,
    #[serde(default = "default_replicas")]
    pub replicas: u32,
}

impl SweepConfig {
    pub fn model(&self, epsilon: f64) -> ModelConfig {
        ModelConfig {
            name: self.name.clone(),
            b: self.b,
            epsilon,
            l: self.l,
            offsets: self.offsets.clone(),
            schedule: self.schedule.clone(),
            side: self.side,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeanfieldConfig {
    pub b: u32,
    /// Defaults to the grid 0, 0.025, ..., 0.5.
    #[serde(default)]
    pub epsilons: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub steps: u32,
    #[serde(rename = "R")]
    pub side: u32,
    #[serde(default = "default_replicas")]
    pub replicas: u32,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub b: u32,
    pub g: f64,
    pub p: f64,
    pub delta: f64,
    #[serde(default)]
    pub seed: Option<u64>,
    /// When present and the certificate passes, simulate the certified
    /// model and report whether the estimate respects the bound.
    #[serde(default)]
    pub mc: Option<McConfig>,
}

fn default_kappa_max_n() -> u32 {
    3
}

fn default_recurrence_items() -> u32 {
    12
}

fn default_recursion_height() -> u32 {
    3
}

fn default_tree_height() -> u32 {
    4
}

fn default_small_t_gamma() -> u64 {
    9
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    /// Subset of {"kappa", "recursion", "tree", "small-t"}; defaults to
    /// all four, always reported in that order.
    #[serde(default)]
    pub suites: Option<Vec<String>>,
    #[serde(default = "default_kappa_max_n")]
    pub kappa_max_n: u32,
    #[serde(default = "default_recurrence_items")]
    pub recurrence_max_items: u32,
    #[serde(default = "default_recursion_height")]
    pub recursion_max_height: u32,
    #[serde(default = "default_tree_height")]
    pub tree_max_height: u32,
    #[serde(default = "default_small_t_gamma")]
    pub small_t_gamma: u64,
}
