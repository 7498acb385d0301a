use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{detect, detection_crops, Detection, DetectionPrompt, Detector, FrameView, PerceptionError, Tracker};
use crate::geometry::BBox;
use crate::matching::{match_detections, score_crop, Crop, Embedder, MatchConfig, MatchScore, ReferenceDescriptor, SCORE_EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackPhase {
    Searching,
    Locked,
    Revalidating,
    Lost,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackConfig {
    pub revalidate_every: u32,
    /// Re-search once this many revalidation frames have failed in a row.
    pub stale_limit: u32,
    pub revalidate_threshold: f64,
    /// Minimum overlap for a fresh detection to replace the anchor on revalidation.
    pub reanchor_min_iou: f64,
}

impl Default for TrackConfig {
    fn default() -> Self {
        Self {
            revalidate_every: 20,
            stale_limit: 80,
            revalidate_threshold: 0.5,
            reanchor_min_iou: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackState {
    pub phase: TrackPhase,
    pub anchor_bbox: Option<BBox>,
    pub frames_since_validation: u32,
    pub stale_frames: u32,
    pub target_ref: Arc<ReferenceDescriptor>,
    pub last_score: Option<MatchScore>,
}

impl TrackState {
    pub fn new(target_ref: Arc<ReferenceDescriptor>) -> Self {
        Self {
            phase: TrackPhase::Searching,
            anchor_bbox: None,
            frames_since_validation: 0,
            stale_frames: 0,
            target_ref,
            last_score: None,
        }
    }

    fn lock(&mut self, bbox: BBox, score: MatchScore) {
        self.phase = TrackPhase::Locked;
        self.anchor_bbox = Some(bbox);
        self.frames_since_validation = 0;
        self.stale_frames = 0;
        self.last_score = Some(score);
    }

    fn restart(&mut self) {
        self.phase = TrackPhase::Searching;
        self.anchor_bbox = None;
        self.frames_since_validation = 0;
        self.stale_frames = 0;
    }
}

/// Scores crops against the target reference.
pub trait Matcher: Send + Sync {
    /// Best crop passing the embedding gate.
    fn select(&self, crops: &[Crop], reference: &ReferenceDescriptor) -> Option<(u32, MatchScore)>;
    /// Ungated score of a single crop.
    fn score(&self, crop: &Crop, reference: &ReferenceDescriptor) -> Option<MatchScore>;
    fn embed_gate(&self) -> f64;
}

/// Embedding + banded color fusion.
#[derive(Clone)]
pub struct FusionMatcher {
    pub embedder: Arc<dyn Embedder>,
    pub cfg: MatchConfig,
}

impl Matcher for FusionMatcher {
    fn select(&self, crops: &[Crop], reference: &ReferenceDescriptor) -> Option<(u32, MatchScore)> {
        match_detections(crops, reference, self.embedder.as_ref(), &self.cfg)
    }

    fn score(&self, crop: &Crop, reference: &ReferenceDescriptor) -> Option<MatchScore> {
        score_crop(crop, reference, self.embedder.as_ref(), &self.cfg).ok()
    }

    fn embed_gate(&self) -> f64 {
        self.cfg.embed_gate
    }
}

pub struct TrackDeps<'a, F> {
    pub detector: &'a dyn Detector<F>,
    pub tracker: &'a mut dyn Tracker<F>,
    pub matcher: &'a dyn Matcher,
    pub prompt: &'a DetectionPrompt,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Revalidation {
    pub score: Option<MatchScore>,
    pub passed: bool,
}

/// What happened during one `advance` call.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub frame: u64,
    pub phase: TrackPhase,
    /// Set when a search locked onto a detection this frame.
    pub matched: Option<(Detection, MatchScore)>,
    pub revalidation: Option<Revalidation>,
}

/// Consumes one frame. Failures surface as phase changes, never as errors.
pub fn advance<F: FrameView>(state: &mut TrackState, frame: &F, deps: &mut TrackDeps<'_, F>, cfg: &TrackConfig) -> StepOutcome {
    let mut out = StepOutcome {
        frame: frame.index(),
        phase: state.phase,
        matched: None,
        revalidation: None,
    };
    match state.phase {
        TrackPhase::Searching => {
            if let Some((det, score)) = search(state, frame, deps) {
                deps.tracker.init(frame, det.bbox);
                state.lock(det.bbox, score);
                out.matched = Some((det, score));
            }
        }
        TrackPhase::Locked | TrackPhase::Revalidating => {
            let anchor = state.anchor_bbox.expect("tracking phases keep an anchor");
            match deps.tracker.step(frame, anchor) {
                Ok(bbox) => {
                    state.anchor_bbox = Some(bbox);
                    if state.phase == TrackPhase::Locked {
                        state.frames_since_validation += 1;
                        if state.frames_since_validation >= cfg.revalidate_every {
                            state.phase = TrackPhase::Revalidating;
                        }
                    }
                    if state.phase == TrackPhase::Revalidating {
                        out.revalidation = Some(revalidate(state, frame, deps, cfg));
                    }
                }
                Err(PerceptionError::TrackerLost) | Err(PerceptionError::DetectorFailure(_)) => {
                    tracing::debug!(frame = frame.index(), "tracker lost target");
                    state.phase = TrackPhase::Lost;
                    out.revalidation = Some(revalidate(state, frame, deps, cfg));
                }
            }
        }
        TrackPhase::Lost => {
            out.revalidation = Some(revalidate(state, frame, deps, cfg));
        }
    }
    out.phase = state.phase;
    out
}

fn search<F: FrameView>(state: &TrackState, frame: &F, deps: &TrackDeps<'_, F>) -> Option<(Detection, MatchScore)> {
    let detections = detect(frame, deps.prompt, deps.detector)
        .inspect_err(|err| tracing::debug!(frame = frame.index(), %err, "search skipped"))
        .ok()?;
    let crops = detection_crops(frame, &detections);
    let (id, score) = deps.matcher.select(&crops, &state.target_ref)?;
    let det = detections.into_iter().find(|d| d.id == id)?;
    Some((det, score))
}

/// Scores the region under the anchor, preferring a fresh detection that
/// overlaps it, and either re-anchors or counts a stale frame.
fn revalidate<F: FrameView>(state: &mut TrackState, frame: &F, deps: &mut TrackDeps<'_, F>, cfg: &TrackConfig) -> Revalidation {
    let anchor = state.anchor_bbox.expect("revalidation needs an anchor");
    let detections = detect(frame, deps.prompt, deps.detector).unwrap_or_default();
    let candidate = detections
        .iter()
        .map(|d| (anchor.iou(&d.bbox), d))
        .filter(|(iou, _)| *iou + SCORE_EPS >= cfg.reanchor_min_iou)
        .max_by(|a, b| a.0.total_cmp(&b.0).then(b.1.id.cmp(&a.1.id)))
        .map(|(_, d)| (d.bbox, d.identity_hint.clone()))
        .unwrap_or((anchor, None));
    let score = frame.crop(&candidate.0).and_then(|image| {
        let crop = Crop {
            detection_id: u32::MAX,
            image,
            identity_hint: candidate.1,
        };
        deps.matcher.score(&crop, &state.target_ref)
    });
    let passed = score.is_some_and(|s| {
        s.s_final + SCORE_EPS >= cfg.revalidate_threshold && s.s_embed + SCORE_EPS >= deps.matcher.embed_gate()
    });
    if passed {
        deps.tracker.init(frame, candidate.0);
        state.lock(candidate.0, score.expect("passed implies a score"));
    } else {
        state.stale_frames += 1;
        if state.phase != TrackPhase::Lost {
            state.phase = TrackPhase::Revalidating;
        }
        if state.stale_frames > cfg.stale_limit {
            tracing::debug!(frame = frame.index(), "target stale, searching again");
            state.restart();
        }
    }
    Revalidation { score, passed }
}
