//! Scenario configuration files. Every field has a default; unknown fields
//! are rejected.

use std::path::Path;

use bearing_rigidity::controller::{ControllerParams, Gains, Limits, SpeedProfile};
use bearing_rigidity::protocol::{Membership, Routing};
use bearing_rigidity::sensing::{WeightParams, WeightSupport};
use bearing_rigidity::DEFAULT_TOL;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{ExperimentError, Result};
use crate::generate::Region;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Fig1,
    Fig2,
    Mission,
    Analyze,
}

/// Graph whose diameter normalizes the delay metric.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiameterGraph {
    #[default]
    Sensing,
    Routing,
}

/// Percentages of vertices with minimal radius at most 1, 2, 3 for bearing
/// and distance rigidity on Erdős–Rényi frameworks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig1Config {
    pub experiment: Option<ExperimentKind>,
    pub seed: u64,
    pub dim: usize,
    pub n_values: Vec<usize>,
    pub samples: usize,
    /// Expected average degree; `rho = avg_degree / (n - 1)`.
    pub avg_degree: f64,
    /// Graph draws allowed per accepted sample.
    pub max_attempts: u64,
    pub tol: f64,
}

impl Default for Fig1Config {
    fn default() -> Self {
        Self {
            experiment: None,
            seed: 1,
            dim: 3,
            n_values: (10..=50).step_by(5).collect(),
            samples: 50,
            avg_degree: 5.0,
            max_attempts: 100_000,
            tol: DEFAULT_TOL,
        }
    }
}

/// Protocol delay and complexity on sensing frameworks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig2Config {
    pub experiment: Option<ExperimentKind>,
    pub seed: u64,
    pub n_values: Vec<usize>,
    pub samples: usize,
    pub range: f64,
    pub fov_cos: f64,
    pub region: Region,
    pub routing: Routing,
    pub diameter_graph: DiameterGraph,
    /// `a` values for the `h_i <= a` columns.
    pub delay_thresholds: Vec<f64>,
    /// `b` values for the `c_i <= b` columns.
    pub complexity_thresholds: Vec<f64>,
    /// Delay band `[low, high]` and complexity bound of the joint columns.
    pub delay_band: [f64; 2],
    pub complexity_bound: f64,
    pub max_attempts: u64,
    pub tol: f64,
}

impl Default for Fig2Config {
    fn default() -> Self {
        Self {
            experiment: None,
            seed: 2,
            n_values: (10..=100).step_by(10).collect(),
            samples: 50,
            range: 0.5,
            fov_cos: 0.5,
            region: Region::unit_cube(3),
            routing: Routing::Sensing,
            diameter_graph: DiameterGraph::Sensing,
            delay_thresholds: vec![0.25, 0.5, 0.75, 1.0],
            complexity_thresholds: vec![1.0, 1.5, 2.0, 3.0],
            delay_band: [0.5, 1.0],
            complexity_bound: 2.0,
            max_attempts: 100_000,
            tol: DEFAULT_TOL,
        }
    }
}

/// Closed-loop target collection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MissionConfig {
    pub experiment: Option<ExperimentKind>,
    pub seed: u64,
    pub n: usize,
    pub range: f64,
    pub fov_cos: f64,
    pub comm_range: f64,
    pub initial_region: Region,
    pub target_region: Region,
    pub targets: usize,
    pub collect_radius: f64,
    pub speed: SpeedProfile,
    pub gains: Gains,
    pub limits: Limits,
    pub weights: WeightParams,
    pub weight_support: WeightSupport,
    pub routing: Routing,
    pub membership: Membership,
    /// Maximum number of times a step's commands are halved to stay inside
    /// the eigenvalue floor and the minimum distance; 0 disables.
    pub step_halvings: u32,
    pub dt: f64,
    pub duration: f64,
    pub snapshots: Vec<f64>,
    /// Resample the initial swarm until every minimal radius equals 1.
    pub require_unit_radii: bool,
    pub max_attempts: u64,
    /// Keep the per-step protocol message log.
    pub message_log: bool,
    pub tol: f64,
}

impl Default for MissionConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            seed: 7,
            n: 15,
            range: 20.0,
            fov_cos: 0.5,
            comm_range: 20.0,
            initial_region: Region {
                min: vec![0.0, 0.0, 0.0],
                max: vec![50.0, 50.0, 0.0],
            },
            target_region: Region {
                min: vec![0.0, 0.0, 10.0],
                max: vec![100.0, 100.0, 50.0],
            },
            targets: 100,
            collect_radius: 5.0,
            speed: SpeedProfile::default(),
            gains: Gains::default(),
            limits: Limits::default(),
            weights: WeightParams::default(),
            weight_support: WeightSupport::AllPairs,
            routing: Routing::Sensing,
            membership: Membership::Frozen,
            step_halvings: 8,
            dt: 0.1,
            duration: 300.0,
            snapshots: vec![0.0, 100.0, 300.0],
            require_unit_radii: true,
            max_attempts: 100_000,
            message_log: false,
            tol: DEFAULT_TOL,
        }
    }
}

impl MissionConfig {
    pub fn controller(&self) -> ControllerParams {
        ControllerParams {
            gains: self.gains,
            limits: self.limits,
            weights: self.weights,
            weight_support: self.weight_support,
            comm_range: self.comm_range,
        }
    }

    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }
}

/// Checks ranges and the optional `experiment` tag of a parsed config.
pub trait Validate {
    const KIND: ExperimentKind;
    fn tag(&self) -> Option<ExperimentKind>;
    fn check(&self) -> std::result::Result<(), String>;

    fn validate(&self) -> Result<()> {
        if let Some(kind) = self.tag() {
            if kind != Self::KIND {
                return Err(ExperimentError::Config(format!(
                    "config is for {kind:?}, expected {:?}",
                    Self::KIND
                )));
            }
        }
        self.check().map_err(ExperimentError::Config)
    }
}

fn positive_tol(tol: f64) -> std::result::Result<(), String> {
    if tol > 0.0 && tol < 1.0 {
        Ok(())
    } else {
        Err(format!("tol must lie in (0, 1), got {tol}"))
    }
}

impl Validate for Fig1Config {
    const KIND: ExperimentKind = ExperimentKind::Fig1;

    fn tag(&self) -> Option<ExperimentKind> {
        self.experiment
    }

    fn check(&self) -> std::result::Result<(), String> {
        if !(2..=3).contains(&self.dim) {
            return Err(format!("dim must be 2 or 3, got {}", self.dim));
        }
        if self.n_values.is_empty() || self.n_values.iter().any(|&n| n < 2) {
            return Err("n_values must be non-empty with every n >= 2".into());
        }
        if self.samples == 0 || self.max_attempts == 0 {
            return Err("samples and max_attempts must be positive".into());
        }
        for &n in &self.n_values {
            let rho = self.avg_degree / (n as f64 - 1.0);
            if !(rho > 0.0 && rho <= 1.0) {
                return Err(format!("avg_degree {} gives rho = {rho} at n = {n}", self.avg_degree));
            }
        }
        positive_tol(self.tol)
    }
}

impl Validate for Fig2Config {
    const KIND: ExperimentKind = ExperimentKind::Fig2;

    fn tag(&self) -> Option<ExperimentKind> {
        self.experiment
    }

    fn check(&self) -> std::result::Result<(), String> {
        if self.n_values.is_empty() || self.n_values.iter().any(|&n| n < 2) {
            return Err("n_values must be non-empty with every n >= 2".into());
        }
        if self.samples == 0 || self.max_attempts == 0 {
            return Err("samples and max_attempts must be positive".into());
        }
        if !(self.range > 0.0) || !(self.fov_cos > 0.0 && self.fov_cos < 1.0) {
            return Err("range must be positive and fov_cos in (0, 1)".into());
        }
        if !self.region.is_valid() || !(2..=3).contains(&self.region.dim()) {
            return Err("region must be a valid box in 2 or 3 dimensions".into());
        }
        if self.delay_band[0] > self.delay_band[1] {
            return Err("delay_band must be ordered".into());
        }
        positive_tol(self.tol)
    }
}

impl Validate for MissionConfig {
    const KIND: ExperimentKind = ExperimentKind::Mission;

    fn tag(&self) -> Option<ExperimentKind> {
        self.experiment
    }

    fn check(&self) -> std::result::Result<(), String> {
        let dim = self.initial_region.dim();
        if !self.initial_region.is_valid() || !self.target_region.is_valid() || !(2..=3).contains(&dim) {
            return Err("regions must be valid boxes in 2 or 3 dimensions".into());
        }
        if self.target_region.dim() != dim {
            return Err("initial and target regions differ in dimension".into());
        }
        if self.n < 2 {
            return Err("need at least two robots".into());
        }
        if !(self.range > 0.0) || !(self.fov_cos > 0.0 && self.fov_cos < 1.0) {
            return Err("range must be positive and fov_cos in (0, 1)".into());
        }
        if self.comm_range < self.range {
            return Err("comm_range must be at least the sensing range".into());
        }
        if !(self.dt > 0.0) || !(self.duration >= self.dt) {
            return Err("dt must be positive and duration at least dt".into());
        }
        if !(self.collect_radius >= 0.0) || self.max_attempts == 0 {
            return Err("collect_radius must be non-negative and max_attempts positive".into());
        }
        self.controller().validate().map_err(|e| e.to_string())?;
        positive_tol(self.tol)
    }
}

/// Reads and validates a config; an empty object yields all defaults.
pub fn load<T: DeserializeOwned + Validate>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::Io(format!("{}: {e}", path.display())))?;
    let cfg: T = serde_json::from_str(&text).map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))?;
    cfg.validate()?;
    Ok(cfg)
}

/// SHA-256 of the canonical JSON of the resolved config.
pub fn config_hash<T: Serialize>(cfg: &T) -> String {
    let text = serde_json::to_string(cfg).expect("configs serialize");
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_gives_defaults() {
        let c: MissionConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(c, MissionConfig::default());
        assert_eq!(c.steps(), 3000);
        c.validate().unwrap();
        Fig1Config::default().validate().unwrap();
        Fig2Config::default().validate().unwrap();
    }

    #[test]
    fn unknown_fields_and_wrong_tags_are_rejected() {
        assert!(serde_json::from_str::<Fig1Config>(r#"{"samplez": 3}"#).is_err());
        let c: Fig1Config = serde_json::from_str(r#"{"experiment": "fig2"}"#).unwrap();
        assert!(c.validate().is_err());
        let c: MissionConfig = serde_json::from_str(r#"{"comm_range": 5}"#).unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = Fig1Config::default();
        let b = Fig1Config { seed: 2, ..a.clone() };
        assert_eq!(config_hash(&a), config_hash(&a.clone()));
        assert_ne!(config_hash(&a), config_hash(&b));
        assert_eq!(config_hash(&a).len(), 64);
    }
}
