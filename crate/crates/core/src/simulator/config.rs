//! Versioned TOML scenario files.

use serde::{Deserialize, Serialize};

use super::experiments::{default_pose_grid, DetectionCondition, DetectionSettings};
use super::{CameraPose, Intrinsics, NoiseModel, SessionConfig, ShelfSpec, SimError};
use crate::catalog::FilterConfig;
use crate::matching::MatchConfig;

pub const SCENARIO_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReasonerSource {
    #[default]
    Geometric,
    /// OpenAI-compatible endpoint configured through the environment.
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraConfig {
    pub width: u32,
    pub height: u32,
    pub hfov_deg: f64,
    pub height_m: f64,
}

impl Default for CameraConfig {
    fn default() -> Self {
        let i = Intrinsics::default();
        Self {
            width: i.width,
            height: i.height,
            hfov_deg: i.hfov_deg,
            height_m: CameraPose::DEFAULT_HEIGHT_M,
        }
    }
}

impl CameraConfig {
    pub fn intrinsics(&self) -> Intrinsics {
        Intrinsics {
            width: self.width,
            height: self.height,
            hfov_deg: self.hfov_deg,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionConfig {
    pub grid: Vec<DetectionCondition>,
    pub sweep_step_deg: f64,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        Self {
            grid: default_pose_grid(),
            sweep_step_deg: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NavigationConfig {
    pub distances_m: Vec<f64>,
}

impl Default for NavigationConfig {
    fn default() -> Self {
        Self { distances_m: vec![1.5, 1.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorrectionConfig {
    pub radius_m: f64,
}

impl Default for CorrectionConfig {
    fn default() -> Self {
        Self { radius_m: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReasonerConfig {
    pub source: ReasonerSource,
}

/// Everything an evaluation run depends on besides the fixture files.
/// The top-level `seed` replaces `noise.seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub version: u32,
    pub seed: u64,
    pub shelf: ShelfSpec,
    pub camera: CameraConfig,
    pub noise: NoiseModel,
    pub detection: DetectionConfig,
    pub navigation: NavigationConfig,
    pub correction: CorrectionConfig,
    pub reasoner: ReasonerConfig,
    pub matching: MatchConfig,
    pub catalog: FilterConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            version: SCENARIO_VERSION,
            seed: 7,
            shelf: ShelfSpec::default(),
            camera: CameraConfig::default(),
            noise: NoiseModel::default(),
            detection: DetectionConfig::default(),
            navigation: NavigationConfig::default(),
            correction: CorrectionConfig::default(),
            reasoner: ReasonerConfig::default(),
            matching: MatchConfig::default(),
            catalog: FilterConfig::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        let cfg: Self = toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, SimError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| SimError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serializes")
    }

    /// Same scenario with every noise source switched off.
    pub fn noiseless(&self) -> Self {
        Self {
            noise: NoiseModel::none(self.seed),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.version != SCENARIO_VERSION {
            return Err(SimError::Config(format!(
                "scenario version {} unsupported (expected {SCENARIO_VERSION})",
                self.version
            )));
        }
        self.shelf.validate()?;
        self.noise.validate()?;
        self.matching.validate().map_err(|e| SimError::Config(e.to_string()))?;
        let c = &self.camera;
        if c.width == 0 || c.height == 0 || !(c.hfov_deg > 0.0 && c.hfov_deg < 180.0) || !c.height_m.is_finite() {
            return Err(SimError::Config(format!("invalid camera {c:?}")));
        }
        for cond in &self.detection.grid {
            CameraPose::new(cond.radius_m, cond.azimuth_deg).validate()?;
        }
        if !(self.detection.sweep_step_deg >= 0.0) {
            return Err(SimError::Config("sweep_step_deg must be non-negative".into()));
        }
        if self.navigation.distances_m.is_empty() || self.navigation.distances_m.iter().any(|d| !(*d > 0.0)) {
            return Err(SimError::Config("navigation distances must be positive and non-empty".into()));
        }
        if !(self.correction.radius_m > 0.0) {
            return Err(SimError::Config("correction radius must be positive".into()));
        }
        if self.shelf.tiers < 2 {
            return Err(SimError::Config("correction needs at least two tiers".into()));
        }
        let f = &self.catalog;
        if ![f.brand_threshold, f.name_threshold].iter().all(|t| (0.0..=1.0).contains(t)) {
            return Err(SimError::Config("catalog thresholds must lie in [0, 1]".into()));
        }
        Ok(())
    }

    pub fn noise_model(&self) -> NoiseModel {
        NoiseModel { seed: self.seed, ..self.noise }
    }

    pub fn detection_settings(&self) -> DetectionSettings {
        DetectionSettings {
            conditions: self.detection.grid.clone(),
            sweep_step_deg: self.detection.sweep_step_deg,
            camera_height_m: self.camera.height_m,
            intrinsics: self.camera.intrinsics(),
        }
    }

    /// Live-session settings for this scenario; tracking, audio and clock
    /// keep their defaults.
    pub fn session_config(&self) -> SessionConfig {
        SessionConfig {
            shelf: std::sync::Arc::new(self.shelf.clone()),
            intrinsics: self.camera.intrinsics(),
            noise: self.noise_model(),
            matching: self.matching,
            filter: self.catalog,
            initial_pose: CameraPose { height_m: self.camera.height_m, ..CameraPose::new(1.0, 0.0) },
            ..SessionConfig::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_the_default_scenario() {
        let cfg = ScenarioConfig::from_toml("").unwrap();
        assert_eq!(cfg, ScenarioConfig::default());
        assert_eq!(cfg.detection.grid.len(), 7);
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = ScenarioConfig::default();
        assert_eq!(ScenarioConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn partial_override() {
        let cfg = ScenarioConfig::from_toml("seed = 3\n[noise]\nspurious_rate = 0.0\n[reasoner]\nsource = \"remote\"\n").unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.noise_model().seed, 3);
        assert_eq!(cfg.noise.spurious_rate, 0.0);
        assert_eq!(cfg.noise.miss_area, NoiseModel::default().miss_area);
        assert_eq!(cfg.reasoner.source, ReasonerSource::Remote);
    }

    #[test]
    fn rejects_malformed_files() {
        for bad in [
            "version = 2",
            "sede = 7",
            "[noise]\nmiss_area = -1.0",
            "[camera]\nhfov_deg = 0.0",
            "[navigation]\ndistances_m = []",
            "[[detection.grid]]\nradius_m = 0.0\nazimuth_deg = 0.0",
            "[matching]\nalpha = 2.0",
            "seed = \"seven\"",
        ] {
            assert!(matches!(ScenarioConfig::from_toml(bad), Err(SimError::Config(_))), "{bad}");
        }
    }
}
