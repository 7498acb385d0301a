use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::frame::SyntheticFrame;
use super::SimError;
use crate::geometry::{BBox, Point};
use crate::guidance::ShelfCell;
use crate::matching::stable_hash;
use crate::perception::{Detection, DetectionPrompt, Detector, HandProvider, PerceptionError};

/// Detector and embedder degradation. Miss probability rises with viewing
/// obliquity and with shrinking projected area.
///
/// Obliquity is that of the viewpoint (the camera's azimuth around the shelf),
/// not of each line of sight: panning at close range sees edge products at
/// steep angles but with plenty of pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseModel {
    pub miss_base: f64,
    /// Weight on `1 - cos(obliquity)`.
    pub miss_obliquity: f64,
    /// Weight on `sqrt(area_ref_px / area) - 1` once the area drops below the reference.
    pub miss_area: f64,
    pub area_ref_px: f64,
    pub bbox_jitter_px: f64,
    /// Expected spurious boxes per frame.
    pub spurious_rate: f64,
    /// Chance, relative to the miss rate, that a product is seen as its look-alike neighbour.
    pub confusion: f64,
    pub embedding_perturbation: f64,
    pub seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            miss_base: 0.0,
            miss_obliquity: 0.4,
            miss_area: 0.1,
            area_ref_px: 9000.0,
            bbox_jitter_px: 2.0,
            spurious_rate: 0.5,
            confusion: 0.5,
            embedding_perturbation: 0.05,
            seed: 7,
        }
    }
}

impl NoiseModel {
    /// Noiseless model: detections equal ground truth.
    pub fn none(seed: u64) -> Self {
        Self {
            miss_base: 0.0,
            miss_obliquity: 0.0,
            miss_area: 0.0,
            bbox_jitter_px: 0.0,
            spurious_rate: 0.0,
            confusion: 0.0,
            embedding_perturbation: 0.0,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let fields = [
            self.miss_base,
            self.miss_obliquity,
            self.miss_area,
            self.area_ref_px,
            self.bbox_jitter_px,
            self.spurious_rate,
            self.confusion,
            self.embedding_perturbation,
        ];
        if fields.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(SimError::Config("noise parameters must be finite and non-negative".into()));
        }
        Ok(())
    }

    pub fn miss_rate(&self, area_px: f64, obliquity_deg: f64) -> f64 {
        let oblique = 1.0 - obliquity_deg.to_radians().cos().clamp(0.0, 1.0);
        let small = if area_px > 0.0 {
            ((self.area_ref_px / area_px).sqrt() - 1.0).max(0.0)
        } else {
            f64::INFINITY
        };
        let small_term = if self.miss_area == 0.0 { 0.0 } else { self.miss_area * small };
        (self.miss_base + self.miss_obliquity * oblique + small_term).clamp(0.0, 1.0)
    }

    fn uniform(&self, tag: &[u8], key: u64, item: &str) -> f64 {
        let h = stable_hash(&[tag, &self.seed.to_le_bytes(), &key.to_le_bytes(), item.as_bytes()]);
        (h >> 11) as f64 / (1u64 << 53) as f64
    }

    fn rng(&self, tag: &[u8], key: u64, item: &str) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(stable_hash(&[tag, &self.seed.to_le_bytes(), &key.to_le_bytes(), item.as_bytes()]))
    }
}

/// Product pairs that are easy to mix up: slots 0↔1, 2↔3, 4↔5 in a tier.
pub fn look_alike(cell: ShelfCell, slots: u32) -> Option<ShelfCell> {
    let other = cell.slot ^ 1;
    (other < slots).then_some(ShelfCell::new(cell.tier, other))
}

/// Ground-truth boxes degraded by the noise model, plus a hand box when a
/// hand is in view. Draws are keyed by `(seed, frame.noise_key, product)`.
pub fn synthetic_detect(frame: &SyntheticFrame, noise: &NoiseModel) -> Vec<Detection> {
    let (w, h) = (frame.width() as f64, frame.height() as f64);
    let key = frame.noise_key;
    let mut out = Vec::new();
    let obliquity = frame.pose.azimuth_deg.abs();
    for (view, bbox) in frame.visible() {
        let p_miss = noise.miss_rate(view.apparent_area_px, obliquity);
        if noise.uniform(b"miss", key, &view.barcode) < p_miss {
            continue;
        }
        let mut identity = view.barcode.clone();
        if noise.uniform(b"confuse", key, &view.barcode) < noise.confusion * p_miss {
            if let Some(other) = look_alike(view.cell, frame.shelf.slots_per_tier).and_then(|c| frame.shelf.product(c)) {
                identity = other.barcode.clone();
            }
        }
        let mut bbox = bbox;
        if noise.bbox_jitter_px > 0.0 {
            let j = noise.bbox_jitter_px;
            let mut rng = noise.rng(b"jitter", key, &view.barcode);
            bbox = BBox::new(
                bbox.x + rng.random_range(-j..=j),
                bbox.y + rng.random_range(-j..=j),
                (bbox.w + rng.random_range(-j..=j)).max(1.0),
                (bbox.h + rng.random_range(-j..=j)).max(1.0),
            );
        }
        let Some(bbox) = bbox.clip(w, h) else { continue };
        out.push(Detection {
            id: out.len() as u32,
            bbox,
            label: "product".into(),
            confidence: (1.0 - p_miss).clamp(0.05, 1.0),
            identity_hint: Some(identity),
        });
    }
    if noise.spurious_rate > 0.0 {
        let mut rng = noise.rng(b"spurious", key, "");
        let whole = noise.spurious_rate.floor() as usize;
        let extra = usize::from(rng.random_bool(noise.spurious_rate.fract()));
        for _ in 0..whole + extra {
            let bw = rng.random_range(30.0..150.0);
            let bh = rng.random_range(30.0..150.0);
            let bbox = BBox::new(rng.random_range(0.0..(w - bw).max(1.0)), rng.random_range(0.0..(h - bh).max(1.0)), bw, bh);
            out.push(Detection {
                id: out.len() as u32,
                bbox,
                label: "item".into(),
                confidence: rng.random_range(0.1..0.6),
                identity_hint: None,
            });
        }
    }
    if let Some(tip) = frame.hand.filter(|p| (0.0..=w).contains(&p.x) && (0.0..=h).contains(&p.y)) {
        if let Some(bbox) = BBox::new(tip.x - 40.0, tip.y - 20.0, 80.0, 160.0).clip(w, h) {
            out.push(Detection {
                id: out.len() as u32,
                bbox,
                label: "body part".into(),
                confidence: 0.9,
                identity_hint: None,
            });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SyntheticDetector {
    pub noise: NoiseModel,
}

impl Detector<SyntheticFrame> for SyntheticDetector {
    fn detect(&self, frame: &SyntheticFrame, _prompt: &DetectionPrompt) -> Result<Vec<Detection>, PerceptionError> {
        Ok(synthetic_detect(frame, &self.noise))
    }
}

/// Reads the simulator's virtual fingertip.
#[derive(Debug, Clone, Copy, Default)]
pub struct SyntheticHand;

impl HandProvider<SyntheticFrame> for SyntheticHand {
    fn fingertip(&self, frame: &SyntheticFrame) -> Option<Point> {
        frame.hand
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::perception::{detect, observe_hand};
    use crate::simulator::{project_shelf, CameraPose, Intrinsics, ShelfSpec};

    fn frame() -> SyntheticFrame {
        project_shelf(&Arc::new(ShelfSpec::default()), &CameraPose::new(1.0, 0.0), Intrinsics::default())
    }

    #[test]
    fn zero_noise_is_ground_truth() {
        let f = frame();
        let dets = synthetic_detect(&f, &NoiseModel::none(1));
        let gt: Vec<_> = f.visible().map(|(v, b)| (Some(v.barcode.clone()), b)).collect();
        let got: Vec<_> = dets.iter().map(|d| (d.identity_hint.clone(), d.bbox)).collect();
        assert_eq!(got, gt);
        assert_eq!(dets.len(), 18);
    }

    #[test]
    fn total_miss_gives_nothing() {
        let noise = NoiseModel { miss_base: 1.0, spurious_rate: 0.0, ..NoiseModel::none(1) };
        assert!(synthetic_detect(&frame(), &noise).is_empty());
    }

    #[test]
    fn seeded_runs_repeat() {
        let noise = NoiseModel { miss_base: 0.3, spurious_rate: 2.5, ..NoiseModel::default() };
        let mut f = frame();
        f.noise_key = 42;
        assert_eq!(synthetic_detect(&f, &noise), synthetic_detect(&f, &noise));
        let other = NoiseModel { seed: 8, ..noise };
        assert_ne!(synthetic_detect(&f, &noise), synthetic_detect(&f, &other));
    }

    #[test]
    fn miss_rate_is_monotone() {
        let n = NoiseModel::default();
        assert_eq!(n.miss_rate(1e9, 0.0), 0.0);
        let mut last = 0.0;
        for obl in [0.0, 10.0, 30.0, 60.0, 80.0] {
            let m = n.miss_rate(20_000.0, obl);
            assert!(m >= last);
            last = m;
        }
        let mut last = 0.0;
        for area in [50_000.0, 9_000.0, 4_000.0, 500.0, 10.0] {
            let m = n.miss_rate(area, 20.0);
            assert!(m >= last);
            last = m;
        }
    }

    #[test]
    fn hand_is_detected_then_filtered() {
        let mut f = frame();
        f.hand = Some(Point::new(400.0, 300.0));
        let raw = synthetic_detect(&f, &NoiseModel::none(1));
        assert!(raw.iter().any(|d| d.label == "body part"));
        let kept = detect(&f, &DetectionPrompt::default(), &SyntheticDetector { noise: NoiseModel::none(1) }).unwrap();
        assert_eq!(kept.len(), 18);
        assert_eq!(observe_hand(&f, &SyntheticHand).fingertip, Some(Point::new(400.0, 300.0)));
        f.hand = Some(Point::new(1400.0, 300.0));
        assert_eq!(observe_hand(&f, &SyntheticHand).fingertip, None);
    }

    #[test]
    fn look_alike_pairs() {
        assert_eq!(look_alike(ShelfCell::new(1, 0), 6), Some(ShelfCell::new(1, 1)));
        assert_eq!(look_alike(ShelfCell::new(1, 5), 6), Some(ShelfCell::new(1, 4)));
        assert_eq!(look_alike(ShelfCell::new(0, 4), 5), None);
    }
}
