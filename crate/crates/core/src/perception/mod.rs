//! Detector, tracker and hand-landmark interfaces plus the
//! detect → match → track state machine.

mod state;
mod tracker;

use serde::{Deserialize, Serialize};

pub use state::{advance, FusionMatcher, Matcher, Revalidation, StepOutcome, TrackConfig, TrackDeps, TrackPhase, TrackState};
pub use tracker::IouTracker;

use crate::geometry::{BBox, Point};
use crate::matching::{Crop, RgbImage};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum PerceptionError {
    #[error("detector failed: {0}")]
    DetectorFailure(String),
    #[error("tracker lost the target")]
    TrackerLost,
}

/// A frame as seen by perception components.
pub trait FrameView {
    fn index(&self) -> u64;
    fn size(&self) -> (u32, u32);
    fn crop(&self, bbox: &BBox) -> Option<RgbImage>;
}

/// Frames that expose object outlines, for trackers that work on geometry
/// instead of pixels.
pub trait ObjectBoxes {
    fn object_boxes(&self) -> Vec<BBox>;
}

/// Plain decoded frame.
#[derive(Debug, Clone)]
pub struct ImageFrame {
    pub index: u64,
    pub image: RgbImage,
}

impl FrameView for ImageFrame {
    fn index(&self) -> u64 {
        self.index
    }

    fn size(&self) -> (u32, u32) {
        (self.image.width(), self.image.height())
    }

    fn crop(&self, bbox: &BBox) -> Option<RgbImage> {
        self.image.crop(bbox)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub id: u32,
    pub bbox: BBox,
    pub label: String,
    pub confidence: f64,
    /// Ground-truth identity when the detector is simulated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity_hint: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionPrompt {
    pub classes: Vec<String>,
    pub product_classes: Vec<String>,
}

impl Default for DetectionPrompt {
    fn default() -> Self {
        let classes: Vec<String> = ["product", "item", "human", "body part"].map(String::from).into();
        Self {
            product_classes: classes[..2].to_vec(),
            classes,
        }
    }
}

impl DetectionPrompt {
    pub fn is_product(&self, label: &str) -> bool {
        self.product_classes.iter().any(|c| c == label)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HandObservation {
    pub fingertip: Option<Point>,
    pub timestamp: u64,
}

pub trait Detector<F>: Send + Sync {
    fn detect(&self, frame: &F, prompt: &DetectionPrompt) -> Result<Vec<Detection>, PerceptionError>;
}

/// Single-object tracker. `init` is called whenever the anchor is (re)set.
pub trait Tracker<F>: Send {
    fn init(&mut self, frame: &F, bbox: BBox);
    fn step(&mut self, frame: &F, previous: BBox) -> Result<BBox, PerceptionError>;
}

pub trait HandProvider<F>: Send + Sync {
    fn fingertip(&self, frame: &F) -> Option<Point>;
}

/// Runs the detector and keeps product-class boxes only.
pub fn detect<F>(frame: &F, prompt: &DetectionPrompt, detector: &dyn Detector<F>) -> Result<Vec<Detection>, PerceptionError> {
    let mut dets = detector.detect(frame, prompt)?;
    dets.retain(|d| prompt.is_product(&d.label));
    Ok(dets)
}

/// Fingertip reported only when it lies inside the frame.
pub fn observe_hand<F: FrameView>(frame: &F, provider: &dyn HandProvider<F>) -> HandObservation {
    let (w, h) = frame.size();
    let fingertip = provider.fingertip(frame).filter(|p| {
        p.x.is_finite() && p.y.is_finite() && (0.0..=w as f64).contains(&p.x) && (0.0..=h as f64).contains(&p.y)
    });
    HandObservation {
        fingertip,
        timestamp: frame.index(),
    }
}

/// Image crops for each detection; boxes that fall outside the frame are dropped.
pub fn detection_crops<F: FrameView>(frame: &F, detections: &[Detection]) -> Vec<Crop> {
    detections
        .iter()
        .filter_map(|d| {
            frame.crop(&d.bbox).map(|image| Crop {
                detection_id: d.id,
                image,
                identity_hint: d.identity_hint.clone(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Fixed(Vec<Detection>);

    impl Detector<ImageFrame> for Fixed {
        fn detect(&self, _: &ImageFrame, _: &DetectionPrompt) -> Result<Vec<Detection>, PerceptionError> {
            Ok(self.0.clone())
        }
    }

    fn det(id: u32, label: &str) -> Detection {
        Detection {
            id,
            bbox: BBox::new(0.0, 0.0, 10.0, 10.0),
            label: label.into(),
            confidence: 0.9,
            identity_hint: None,
        }
    }

    fn frame() -> ImageFrame {
        ImageFrame { index: 3, image: RgbImage::filled(64, 48, [0, 0, 0]) }
    }

    #[test]
    fn non_product_classes_are_dropped() {
        let d = Fixed(vec![det(0, "product"), det(1, "human"), det(2, "item"), det(3, "body part")]);
        let kept = detect(&frame(), &DetectionPrompt::default(), &d).unwrap();
        assert_eq!(kept.iter().map(|d| d.id).collect::<Vec<_>>(), [0, 2]);
        assert!(detect(&frame(), &DetectionPrompt::default(), &Fixed(vec![])).unwrap().is_empty());
    }

    struct Hand(Option<Point>);

    impl HandProvider<ImageFrame> for Hand {
        fn fingertip(&self, _: &ImageFrame) -> Option<Point> {
            self.0
        }
    }

    #[test]
    fn hand_outside_frame_is_absent() {
        assert_eq!(observe_hand(&frame(), &Hand(None)).fingertip, None);
        let obs = observe_hand(&frame(), &Hand(Some(Point::new(40.0, 30.0))));
        assert_eq!(obs.fingertip, Some(Point::new(40.0, 30.0)));
        assert_eq!(obs.timestamp, 3);
        assert_eq!(observe_hand(&frame(), &Hand(Some(Point::new(65.0, 30.0)))).fingertip, None);
    }

    #[test]
    fn crops_skip_out_of_frame_boxes() {
        let mut far = det(1, "product");
        far.bbox = BBox::new(100.0, 100.0, 5.0, 5.0);
        let crops = detection_crops(&frame(), &[det(0, "product"), far]);
        assert_eq!(crops.len(), 1);
        assert_eq!((crops[0].image.width(), crops[0].image.height()), (10, 10));
    }
}
