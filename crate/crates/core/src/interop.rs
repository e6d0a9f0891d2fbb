//! Shared-data-layer documents: the JSON schemas exchanged with external
//! simulators (scenario configuration, deployments, trajectories, drop
//! reports) and their loaders.
//!
//! Angles are stored in degrees in files and converted to radians only at
//! this boundary. Unknown keys are rejected, every document embeds a schema
//! version, and loaders refuse versions newer than they understand. Saving
//! and loading is lossless at full f64 precision.

use std::fs;
use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use thiserror::Error;

use crate::antenna::{AZIMUTH_BOUND, TILT_MAX, TILT_MIN};
use crate::geometry::{Aoi, Building, Point2, Scene};
use crate::orient::{OrientLossConfig, OrientPowerParams};
use crate::placement::{AttractionForm, PlacementHyper};
use crate::propagation::PropagationConfig;
use crate::resilience::{DetectorConfig, DropEvent};

/// Current major version embedded in every document.
pub const SCHEMA_VERSION: u32 = 1;

/// Angle-range validation slack in degrees.
const ANGLE_TOL_DEG: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum InteropError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: parse error at `{field_path}`: {message}")]
    Parse {
        path: String,
        field_path: String,
        message: String,
    },
    #[error("{path}: schema version {found} is newer than supported version {supported}")]
    UnsupportedVersion {
        path: String,
        found: u32,
        supported: u32,
    },
    #[error("validation failed: {0}")]
    Validation(String),
}

fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T, InteropError> {
    let text = fs::read_to_string(path).map_err(|source| InteropError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut de = serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| InteropError::Parse {
        path: path.display().to_string(),
        field_path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

fn save_json<T: Serialize>(value: &T, path: &Path) -> Result<(), InteropError> {
    let mut text = serde_json::to_string_pretty(value).expect("document serialization");
    text.push('\n');
    fs::write(path, text).map_err(|source| InteropError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn check_version(path: &Path, found: u32) -> Result<(), InteropError> {
    if found > SCHEMA_VERSION {
        return Err(InteropError::UnsupportedVersion {
            path: path.display().to_string(),
            found,
            supported: SCHEMA_VERSION,
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Scenario
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildingDoc {
    pub bbox_min: [f64; 2],
    pub bbox_max: [f64; 2],
    pub height_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneDoc {
    pub extent_min: [f64; 2],
    pub extent_max: [f64; 2],
    pub hover_elevation_m: f64,
    pub buildings: Vec<BuildingDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AoiDoc {
    pub center: [f64; 2],
    pub radius_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RfDoc {
    pub frequency_hz: f64,
    pub default_tx_power_dbm: f64,
}

/// Optional overrides keyed by the spelled-out hyperparameter names.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HyperDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_i: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_points_x: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_points_y: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub patience: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_l: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cell_size_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub occlusion_softness_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blockage_floor_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attraction_form: Option<AttractionForm>,
}

/// Optional drop-detector overrides.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_min_watts: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_min: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_p: Option<usize>,
}

/// Scenario configuration: scene, areas of interest, RF parameters, and
/// optional hyperparameter / detector overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub schema_version: u32,
    pub scene: SceneDoc,
    pub aois: Vec<AoiDoc>,
    pub rf: RfDoc,
    #[serde(default, skip_serializing_if = "is_default_hyper")]
    pub hyper: HyperDoc,
    #[serde(default, skip_serializing_if = "is_default_detector")]
    pub detector: DetectorDoc,
    pub seed: u64,
}

fn is_default_hyper(h: &HyperDoc) -> bool {
    *h == HyperDoc::default()
}

fn is_default_detector(d: &DetectorDoc) -> bool {
    *d == DetectorDoc::default()
}

impl ScenarioDoc {
    pub fn to_scene(&self) -> Result<Scene, InteropError> {
        let buildings = self
            .scene
            .buildings
            .iter()
            .map(|b| Building::new(b.bbox_min, b.bbox_max, b.height_m))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| InteropError::Validation(e.to_string()))?;
        let scene = Scene::new(
            self.scene.extent_min,
            self.scene.extent_max,
            buildings,
            self.scene.hover_elevation_m,
        )
        .map_err(|e| InteropError::Validation(e.to_string()))?;
        for (k, a) in self.aois.iter().enumerate() {
            if !scene.contains(a.center) {
                return Err(InteropError::Validation(format!(
                    "AOI {k} center {:?} lies outside the scene extent",
                    a.center
                )));
            }
        }
        Ok(scene)
    }

    pub fn to_aois(&self) -> Result<Vec<Aoi>, InteropError> {
        self.aois
            .iter()
            .map(|a| {
                Aoi::new(a.center, a.radius_m).map_err(|e| InteropError::Validation(e.to_string()))
            })
            .collect()
    }

    /// Placement settings: defaults overridden by the scenario's hyper block.
    pub fn placement_hyper(&self) -> PlacementHyper {
        let mut h = PlacementHyper::default();
        let o = &self.hyper;
        if let Some(v) = o.alpha {
            h.alpha = v;
        }
        if let Some(v) = o.beta {
            h.beta = v;
        }
        if let Some(v) = o.gamma {
            h.gamma = v;
        }
        if let Some(v) = o.eta {
            h.eta = v;
        }
        if let Some(v) = o.kappa_a {
            h.kappa_a = v;
        }
        if let Some(v) = o.kappa_b {
            h.kappa_b = v;
        }
        if let Some(v) = o.kappa_i {
            h.kappa_i = v;
        }
        if let Some(v) = o.d_min {
            h.d_min = v;
        }
        if let Some(v) = o.c_b {
            h.c_b = v;
        }
        if let Some(v) = o.grid_points_x {
            h.grid.points_x = v;
        }
        if let Some(v) = o.grid_points_y {
            h.grid.points_y = v;
        }
        if let Some(v) = o.margin {
            h.grid.margin = v;
        }
        if let Some(v) = o.learning_rate {
            h.learning_rate = v;
        }
        if let Some(v) = o.max_iterations {
            h.max_iterations = v;
        }
        if let Some(v) = o.patience {
            h.patience = v;
        }
        if let Some(v) = o.attraction_form {
            h.attraction_form = v;
        }
        h
    }

    /// Propagation model settings with the scenario's RF parameters applied.
    pub fn propagation_config(&self) -> PropagationConfig {
        let mut cfg = PropagationConfig {
            f_c_hz: self.rf.frequency_hz,
            ..PropagationConfig::default()
        };
        if let Some(v) = self.hyper.cell_size_m {
            cfg.cell_size_m = v;
        }
        if let Some(v) = self.hyper.occlusion_softness_m {
            cfg.occlusion_softness_m = v;
        }
        if let Some(v) = self.hyper.blockage_floor_db {
            cfg.blockage_floor_db = v;
        }
        cfg
    }

    /// Orientation-loss settings with overrides applied.
    pub fn orient_loss_config(&self) -> OrientLossConfig {
        let mut cfg = OrientLossConfig::default();
        if let Some(v) = self.hyper.beta_l {
            cfg.beta_l = v;
        }
        if let Some(v) = self.hyper.xi {
            cfg.xi = v;
        }
        if let Some(v) = self.hyper.temperature {
            cfg.temperature = v;
        }
        if let Some(v) = self.hyper.epsilon {
            cfg.epsilon = v;
        }
        cfg
    }

    /// Drop-detector settings with overrides applied.
    pub fn detector_config(&self) -> DetectorConfig {
        let mut cfg = DetectorConfig::default();
        if let Some(v) = self.detector.t_min_watts {
            cfg.t_min_watts = v;
        }
        if let Some(v) = self.detector.c_min {
            cfg.c_min = v;
        }
        if let Some(v) = self.detector.s_p {
            cfg.s_p = v;
        }
        cfg
    }
}

pub fn load_scenario(path: &Path) -> Result<ScenarioDoc, InteropError> {
    let doc: ScenarioDoc = load_json(path)?;
    check_version(path, doc.schema_version)?;
    doc.to_scene()?;
    doc.to_aois()?;
    Ok(doc)
}

pub fn save_scenario(doc: &ScenarioDoc, path: &Path) -> Result<(), InteropError> {
    save_json(doc, path)
}

// ---------------------------------------------------------------------------
// Deployment
// ---------------------------------------------------------------------------

/// One ABS entry: position in meters, mechanical angles in degrees, transmit
/// power in dBm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbsEntry {
    pub id: u32,
    pub x_m: f64,
    pub y_m: f64,
    pub azimuth_deg: f64,
    pub tilt_deg: f64,
    pub tx_power_dbm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeploymentDoc {
    pub schema_version: u32,
    pub abs: Vec<AbsEntry>,
}

impl DeploymentDoc {
    /// Builds a deployment from internal (radian) parameters.
    pub fn from_params(positions: &[Point2], params: &OrientPowerParams) -> Self {
        let abs = positions
            .iter()
            .enumerate()
            .map(|(i, p)| AbsEntry {
                id: i as u32,
                x_m: p[0],
                y_m: p[1],
                azimuth_deg: params.azimuths[i].to_degrees(),
                tilt_deg: params.tilts[i].to_degrees(),
                tx_power_dbm: params.powers_dbm[i],
            })
            .collect();
        Self {
            schema_version: SCHEMA_VERSION,
            abs,
        }
    }

    pub fn positions(&self) -> Vec<Point2> {
        self.abs.iter().map(|a| [a.x_m, a.y_m]).collect()
    }

    /// Internal parameters in radians.
    pub fn orient_params(&self) -> OrientPowerParams {
        OrientPowerParams {
            azimuths: self.abs.iter().map(|a| a.azimuth_deg.to_radians()).collect(),
            tilts: self.abs.iter().map(|a| a.tilt_deg.to_radians()).collect(),
            powers_dbm: self.abs.iter().map(|a| a.tx_power_dbm).collect(),
        }
    }

    pub fn validate(&self) -> Result<(), InteropError> {
        let mut ids: Vec<u32> = self.abs.iter().map(|a| a.id).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != self.abs.len() {
            return Err(InteropError::Validation("duplicate ABS ids".into()));
        }
        let az_bound = AZIMUTH_BOUND.to_degrees() + ANGLE_TOL_DEG;
        let tilt_lo = TILT_MIN.to_degrees() - ANGLE_TOL_DEG;
        let tilt_hi = TILT_MAX.to_degrees() + ANGLE_TOL_DEG;
        for a in &self.abs {
            if !a.azimuth_deg.is_finite() || a.azimuth_deg.abs() > az_bound {
                return Err(InteropError::Validation(format!(
                    "ABS {}: azimuth {} deg outside [-360, 360]",
                    a.id, a.azimuth_deg
                )));
            }
            if !a.tilt_deg.is_finite() || a.tilt_deg < tilt_lo || a.tilt_deg > tilt_hi {
                return Err(InteropError::Validation(format!(
                    "ABS {}: tilt {} deg outside [{tilt_lo:.3}, {tilt_hi:.3}]",
                    a.id, a.tilt_deg
                )));
            }
            if !a.tx_power_dbm.is_finite() {
                return Err(InteropError::Validation(format!(
                    "ABS {}: non-finite transmit power",
                    a.id
                )));
            }
        }
        Ok(())
    }
}

pub fn load_deployment(path: &Path) -> Result<DeploymentDoc, InteropError> {
    let doc: DeploymentDoc = load_json(path)?;
    check_version(path, doc.schema_version)?;
    doc.validate()?;
    Ok(doc)
}

pub fn save_deployment(doc: &DeploymentDoc, path: &Path) -> Result<(), InteropError> {
    save_json(doc, path)
}

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryPoint {
    pub step: u64,
    pub x_m: f64,
    pub y_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryEntity {
    /// Entity name, e.g. `abs-3` or `ue-0`.
    pub id: String,
    pub points: Vec<TrajectoryPoint>,
}

/// Ordered per-entity waypoint lists at a uniform step size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryDoc {
    pub schema_version: u32,
    pub step_duration_s: f64,
    pub entities: Vec<TrajectoryEntity>,
}

impl TrajectoryDoc {
    pub fn new(step_duration_s: f64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            step_duration_s,
            entities: Vec::new(),
        }
    }

    pub fn push_entity(&mut self, id: impl Into<String>, waypoints: &[Point2]) {
        self.entities.push(TrajectoryEntity {
            id: id.into(),
            points: waypoints
                .iter()
                .enumerate()
                .map(|(step, p)| TrajectoryPoint {
                    step: step as u64,
                    x_m: p[0],
                    y_m: p[1],
                })
                .collect(),
        });
    }

    pub fn validate(&self) -> Result<(), InteropError> {
        if !(self.step_duration_s.is_finite() && self.step_duration_s > 0.0) {
            return Err(InteropError::Validation(
                "step duration must be positive".into(),
            ));
        }
        for e in &self.entities {
            for pair in e.points.windows(2) {
                if pair[1].step <= pair[0].step {
                    return Err(InteropError::Validation(format!(
                        "entity {}: steps not strictly increasing at step {}",
                        e.id, pair[1].step
                    )));
                }
            }
        }
        Ok(())
    }
}

pub fn load_trajectories(path: &Path) -> Result<TrajectoryDoc, InteropError> {
    let doc: TrajectoryDoc = load_json(path)?;
    check_version(path, doc.schema_version)?;
    doc.validate()?;
    Ok(doc)
}

pub fn save_trajectories(doc: &TrajectoryDoc, path: &Path) -> Result<(), InteropError> {
    save_json(doc, path)
}

// ---------------------------------------------------------------------------
// Drop reports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DropEventDoc {
    pub t_start: u64,
    pub t_end: u64,
    pub t_mid: u64,
    pub duration: u64,
}

impl From<DropEvent> for DropEventDoc {
    fn from(e: DropEvent) -> Self {
        Self {
            t_start: e.t_start as u64,
            t_end: e.t_end as u64,
            t_mid: e.t_mid() as u64,
            duration: e.duration() as u64,
        }
    }
}

/// Detection outcome for one monitored UE/ABS pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DropReportDoc {
    pub schema_version: u32,
    pub abs_id: u32,
    pub ue_id: String,
    pub t_min_watts: f64,
    pub c_min: usize,
    pub s_p: usize,
    pub events: Vec<DropEventDoc>,
}

pub fn load_drop_report(path: &Path) -> Result<DropReportDoc, InteropError> {
    let doc: DropReportDoc = load_json(path)?;
    check_version(path, doc.schema_version)?;
    Ok(doc)
}

pub fn save_drop_report(doc: &DropReportDoc, path: &Path) -> Result<(), InteropError> {
    save_json(doc, path)
}
