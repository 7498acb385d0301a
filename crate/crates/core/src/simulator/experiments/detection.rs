use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{csv_string, metres, percent, ReferenceSet};
use crate::guidance::ShelfCell;
use crate::matching::{MatchConfig, MatchScore, stable_hash};
use crate::perception::{detect, detection_crops, DetectionPrompt, FusionMatcher, Matcher};
use crate::simulator::{look_angles, project_shelf, CameraPose, Intrinsics, NoiseModel, ShelfSpec, SyntheticDetector};

/// One pose condition of the detection grid. `azimuth_deg` is unsigned;
/// trials use both signs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionCondition {
    pub radius_m: f64,
    pub azimuth_deg: f64,
    /// Aim at each target instead of the shelf centre.
    #[serde(default)]
    pub sweep: bool,
}

/// 0.5 m frontal, then 1.0 m and 1.5 m at 0/30/60 degrees; sweeps where
/// the centre-facing frame cannot hold every product.
pub fn default_pose_grid() -> Vec<DetectionCondition> {
    let c = |radius_m, azimuth_deg, sweep| DetectionCondition { radius_m, azimuth_deg, sweep };
    vec![
        c(0.5, 0.0, true),
        c(1.0, 0.0, false),
        c(1.0, 30.0, false),
        c(1.0, 60.0, true),
        c(1.5, 0.0, false),
        c(1.5, 30.0, false),
        c(1.5, 60.0, false),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionSettings {
    pub conditions: Vec<DetectionCondition>,
    pub sweep_step_deg: f64,
    pub camera_height_m: f64,
    pub intrinsics: Intrinsics,
}

impl Default for DetectionSettings {
    fn default() -> Self {
        Self {
            conditions: default_pose_grid(),
            sweep_step_deg: 10.0,
            camera_height_m: CameraPose::DEFAULT_HEIGHT_M,
            intrinsics: Intrinsics::default(),
        }
    }
}

/// Pose aimed at `cell`, pan and tilt rounded to `step_deg`.
pub fn sweep_pose(shelf: &ShelfSpec, base: CameraPose, cell: ShelfCell, step_deg: f64) -> CameraPose {
    let (cx, cy) = shelf.face(cell).expect("cell on shelf").center();
    let (yaw, pitch) = look_angles(base.position(), [cx, cy, 0.0]);
    let q = |a: f64| if step_deg > 0.0 { (a / step_deg).round() * step_deg } else { a };
    CameraPose {
        pan_deg: Some(q(yaw)),
        tilt_deg: Some(q(pitch)),
        ..base
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionOutcome {
    Success,
    FalseNegative,
    FalsePositive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionTrial {
    pub condition: usize,
    pub target: ShelfCell,
    pub pose: CameraPose,
    pub outcome: DetectionOutcome,
    pub score: Option<MatchScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRow {
    pub radius_m: f64,
    pub angle_deg: f64,
    pub success: usize,
    pub false_negatives: usize,
    pub false_positives: usize,
    pub trials: usize,
}

impl DetectionRow {
    pub fn accuracy(&self) -> f64 {
        self.success as f64 / self.trials.max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionTable {
    pub rows: Vec<DetectionRow>,
    pub trials: Vec<DetectionTrial>,
}

impl DetectionTable {
    pub const HEADER: [&'static str; 6] = ["Distance", "Angle (°)", "Success (count)", "Accuracy", "FN (count)", "FP (count)"];

    pub fn to_csv(&self) -> String {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    format!("{} m", metres(r.radius_m)),
                    metres(r.angle_deg),
                    r.success.to_string(),
                    percent(r.success, r.trials),
                    r.false_negatives.to_string(),
                    r.false_positives.to_string(),
                ]
            })
            .collect();
        csv_string(&Self::HEADER, rows)
    }

    /// Pairs of conditions where accuracy rises although the pose got harder
    /// (same azimuth and larger radius, or same radius and larger |azimuth|).
    pub fn monotonicity_violations(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, easy) in self.rows.iter().enumerate() {
            for (j, hard) in self.rows.iter().enumerate() {
                let same_az = easy.angle_deg.abs() == hard.angle_deg.abs() && hard.radius_m > easy.radius_m;
                let same_r = easy.radius_m == hard.radius_m && hard.angle_deg.abs() > easy.angle_deg.abs();
                if (same_az || same_r) && hard.success * easy.trials > easy.success * hard.trials {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut s = String::from("Product detection\n");
        for r in &self.rows {
            s.push_str(&format!(
                "  {:>4} m {:>3}°  {:>2}/{:<2} {:>6}  FN {:>2}  FP {:>2}\n",
                metres(r.radius_m),
                metres(r.angle_deg),
                r.success,
                r.trials,
                percent(r.success, r.trials),
                r.false_negatives,
                r.false_positives
            ));
        }
        s
    }
}

/// Every shelf product is the target in turn; frontal conditions repeat
/// twice, oblique ones run at both signs of the azimuth. Noise draws are
/// keyed by target and repetition, never by pose, so harder poses see the
/// same draws against higher miss rates.
pub fn run_detection_experiment(
    shelf: &Arc<ShelfSpec>,
    settings: &DetectionSettings,
    noise: &NoiseModel,
    refs: &ReferenceSet,
    match_cfg: &MatchConfig,
) -> DetectionTable {
    let matcher = FusionMatcher {
        embedder: Arc::clone(&refs.embedder),
        cfg: *match_cfg,
    };
    let detector = SyntheticDetector { noise: *noise };
    let prompt = DetectionPrompt::default();
    let mut plan = Vec::new();
    for (ci, cond) in settings.conditions.iter().enumerate() {
        for (ti, cell) in shelf.cells().enumerate() {
            for rep in 0..2u64 {
                let az = if cond.azimuth_deg == 0.0 || rep == 0 { cond.azimuth_deg } else { -cond.azimuth_deg };
                plan.push((ci, ti as u64, cell, rep, az));
            }
        }
    }
    let trials: Vec<DetectionTrial> = plan
        .into_par_iter()
        .map(|(ci, ti, cell, rep, az)| {
            let cond = settings.conditions[ci];
            let mut pose = CameraPose {
                height_m: settings.camera_height_m,
                ..CameraPose::new(cond.radius_m, az)
            };
            if cond.sweep {
                pose = sweep_pose(shelf, pose, cell, settings.sweep_step_deg);
            }
            let mut frame = project_shelf(shelf, &pose, settings.intrinsics);
            frame.noise_key = stable_hash(&[b"trial", &ti.to_le_bytes(), &rep.to_le_bytes()]);
            let target = shelf.product(cell).expect("cell on shelf");
            let reference = refs.get(&target.barcode).expect("reference for every shelf product");
            let detections = detect(&frame, &prompt, &detector).unwrap_or_default();
            let crops = detection_crops(&frame, &detections);
            let selected = matcher.select(&crops, reference);
            let (outcome, score) = match selected {
                None => (DetectionOutcome::FalseNegative, None),
                Some((id, score)) => {
                    let bbox = detections.iter().find(|d| d.id == id).expect("selected id exists").bbox;
                    let hit = frame
                        .visible()
                        .map(|(v, b)| (b.iou(&bbox), v.cell))
                        .filter(|(iou, _)| *iou >= 0.5)
                        .max_by(|a, b| a.0.total_cmp(&b.0))
                        .map(|(_, c)| c);
                    let outcome = if hit == Some(cell) {
                        DetectionOutcome::Success
                    } else {
                        DetectionOutcome::FalsePositive
                    };
                    (outcome, Some(score))
                }
            };
            DetectionTrial {
                condition: ci,
                target: cell,
                pose,
                outcome,
                score,
            }
        })
        .collect();
    let rows = settings
        .conditions
        .iter()
        .enumerate()
        .map(|(ci, cond)| {
            let of = |o| trials.iter().filter(|t| t.condition == ci && t.outcome == o).count();
            DetectionRow {
                radius_m: cond.radius_m,
                angle_deg: cond.azimuth_deg,
                success: of(DetectionOutcome::Success),
                false_negatives: of(DetectionOutcome::FalseNegative),
                false_positives: of(DetectionOutcome::FalsePositive),
                trials: trials.iter().filter(|t| t.condition == ci).count(),
            }
        })
        .collect();
    DetectionTable { rows, trials }
}
