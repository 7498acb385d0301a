//! Interactive guidance session over the synthetic shelf: one shopping list,
//! a movable camera and a virtual fingertip, advanced frame by frame.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{project_shelf, CameraPose, Intrinsics, NoiseModel, ShelfSpec, SimError, SyntheticDetector, SyntheticFrame};
use crate::catalog::{
    fetch_reference_images, filter_catalog, resolve_product, Catalog, CatalogError, FilterConfig, ImageSource,
    ProductQuery, MAX_PRESENTED,
};
use crate::geometry::{BBox, Point};
use crate::guidance::{
    guidance_cue, FrameClock, GuidanceCue, ShelfCell, SonificationConfig, SonificationParams, TouchMonitor, ZoneGrid,
    CONFIRMED_PHRASE,
};
use crate::matching::{stable_hash, Embedder, MatchConfig, MatchScore, ReferenceDescriptor};
use crate::perception::{advance, observe_hand, DetectionPrompt, FusionMatcher, IouTracker, TrackConfig, TrackDeps, TrackPhase, TrackState};
use crate::reasoner::{AnswerSource, ParsedReply, ProductRef, Reasoner, ReasonerAnswer, SpatialQuery};

/// Version of the JSON payloads exchanged with clients.
pub const PROTO_VERSION: u32 = 1;

/// Upper bound on frames consumed by a single `tick` event.
pub const MAX_TICK_FRAMES: u32 = 3000;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("{0}")]
    InvalidEvent(String),
    #[error("several products match; resend with a choice")]
    Ambiguous { candidates: Vec<CandidateView> },
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionPhase {
    Listing,
    Searching,
    Navigating,
    Correcting,
    Done,
}

/// Client input. Positions are frame pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SessionEvent {
    /// `position: null` means the hand left the view.
    HandMove { position: Option<Point> },
    CameraMove {
        radius_m: f64,
        azimuth_deg: f64,
        #[serde(default)]
        pan_deg: Option<f64>,
        #[serde(default)]
        tilt_deg: Option<f64>,
    },
    Tick {
        #[serde(default = "one")]
        frames: u32,
    },
    /// Adds a product to the list. `choice` indexes the offered candidates
    /// when the request is ambiguous.
    ListQuery {
        brand: String,
        name: String,
        #[serde(default)]
        quantity: Option<String>,
        #[serde(default)]
        choice: Option<usize>,
    },
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateView {
    pub barcode: String,
    pub label: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ListItem {
    pub barcode: String,
    pub label: String,
    /// Shelf position, `None` when the product is not stocked.
    pub cell: Option<ShelfCell>,
    pub done: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneProduct {
    pub cell: ShelfCell,
    pub barcode: String,
    pub name: String,
    pub bbox: BBox,
}

/// Vector description of what the camera sees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub width: u32,
    pub height: u32,
    pub pose: CameraPose,
    pub products: Vec<SceneProduct>,
    pub hand: Option<Point>,
    /// Tracked target box.
    pub target: Option<BBox>,
    /// Product under the fingertip and how long it has been held there.
    pub touch: Option<TouchView>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TouchView {
    pub cell: ShelfCell,
    pub dwell_ms: u64,
}

/// One per processed frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionMessage {
    pub proto_version: u32,
    pub frame_idx: u64,
    pub phase: SessionPhase,
    pub scene: Scene,
    pub cue: Option<GuidanceCue>,
    pub sonification: Option<SonificationParams>,
    pub advice: Option<ReasonerAnswer>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackSummary {
    pub phase: TrackPhase,
    pub anchor_bbox: Option<BBox>,
    pub frames_since_validation: u32,
    pub stale_frames: u32,
    pub last_score: Option<MatchScore>,
}

impl From<&TrackState> for TrackSummary {
    fn from(t: &TrackState) -> Self {
        Self {
            phase: t.phase,
            anchor_bbox: t.anchor_bbox,
            frames_since_validation: t.frames_since_validation,
            stale_frames: t.stale_frames,
            last_score: t.last_score,
        }
    }
}

/// Full session state as served to clients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSnapshot {
    pub proto_version: u32,
    pub phase: SessionPhase,
    pub frame_idx: u64,
    pub shopping_list: Vec<ListItem>,
    pub current: Option<usize>,
    pub pose: CameraPose,
    pub hand: Option<Point>,
    pub track: Option<TrackSummary>,
    pub last_cue: Option<GuidanceCue>,
    pub last_advice: Option<ReasonerAnswer>,
}

#[derive(Debug, Clone)]
pub struct SessionConfig {
    pub shelf: Arc<ShelfSpec>,
    pub intrinsics: Intrinsics,
    pub noise: NoiseModel,
    pub matching: MatchConfig,
    pub filter: FilterConfig,
    pub track: TrackConfig,
    pub sonification: SonificationConfig,
    pub clock: FrameClock,
    pub tracker_jitter_px: f64,
    pub initial_pose: CameraPose,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            shelf: Arc::new(ShelfSpec::default()),
            intrinsics: Intrinsics::default(),
            noise: NoiseModel::default(),
            matching: MatchConfig::default(),
            filter: FilterConfig::default(),
            track: TrackConfig::default(),
            sonification: SonificationConfig::default(),
            clock: FrameClock::default(),
            tracker_jitter_px: 1.0,
            initial_pose: CameraPose::new(1.0, 0.0),
        }
    }
}

/// Catalog, images, embedder and reasoner shared by every session.
#[derive(Clone)]
pub struct SessionServices {
    pub catalog: Arc<Catalog>,
    pub images: Arc<dyn ImageSource>,
    pub embedder: Arc<dyn Embedder>,
    pub reasoner: Arc<Reasoner>,
}

pub struct GuidanceSession {
    cfg: SessionConfig,
    services: SessionServices,
    phase: SessionPhase,
    frame_idx: u64,
    pose: CameraPose,
    hand: Option<Point>,
    items: Vec<ListItem>,
    references: Vec<Arc<ReferenceDescriptor>>,
    current: Option<usize>,
    track: Option<TrackState>,
    tracker: IouTracker,
    touch: TouchMonitor,
    last_cue: Option<GuidanceCue>,
    last_advice: Option<ReasonerAnswer>,
}

impl GuidanceSession {
    pub fn new(cfg: SessionConfig, services: SessionServices) -> Result<Self, SessionError> {
        cfg.shelf.validate()?;
        cfg.noise.validate()?;
        cfg.initial_pose.validate()?;
        Ok(Self {
            phase: SessionPhase::Listing,
            frame_idx: 0,
            pose: cfg.initial_pose,
            hand: None,
            items: Vec::new(),
            references: Vec::new(),
            current: None,
            track: None,
            tracker: IouTracker::new(cfg.noise.seed, cfg.tracker_jitter_px),
            touch: TouchMonitor::new(cfg.clock),
            last_cue: None,
            last_advice: None,
            cfg,
            services,
        })
    }

    pub fn phase(&self) -> SessionPhase {
        self.phase
    }

    pub fn snapshot(&self) -> SessionSnapshot {
        SessionSnapshot {
            proto_version: PROTO_VERSION,
            phase: self.phase,
            frame_idx: self.frame_idx,
            shopping_list: self.items.clone(),
            current: self.current,
            pose: self.pose,
            hand: self.hand,
            track: self.track.as_ref().map(TrackSummary::from),
            last_cue: self.last_cue.clone(),
            last_advice: self.last_advice.clone(),
        }
    }

    /// Applies one event. Hand and camera moves consume one frame; ticks
    /// consume `frames`; list queries consume none.
    pub fn apply(&mut self, event: SessionEvent) -> Result<Vec<SessionMessage>, SessionError> {
        match event {
            SessionEvent::HandMove { position } => {
                if let Some(p) = position {
                    if !p.x.is_finite() || !p.y.is_finite() {
                        return Err(SessionError::InvalidEvent("hand position must be finite".into()));
                    }
                }
                self.hand = position;
                Ok(vec![self.step()])
            }
            SessionEvent::CameraMove { radius_m, azimuth_deg, pan_deg, tilt_deg } => {
                let pose = CameraPose {
                    radius_m,
                    azimuth_deg,
                    pan_deg,
                    tilt_deg,
                    height_m: self.pose.height_m,
                };
                pose.validate().map_err(|e| SessionError::InvalidEvent(e.to_string()))?;
                self.pose = pose;
                Ok(vec![self.step()])
            }
            SessionEvent::Tick { frames } => {
                if !(1..=MAX_TICK_FRAMES).contains(&frames) {
                    return Err(SessionError::InvalidEvent(format!("tick frames must be in 1..={MAX_TICK_FRAMES}")));
                }
                Ok((0..frames).map(|_| self.step()).collect())
            }
            SessionEvent::ListQuery { brand, name, quantity, choice } => {
                self.add_item(&brand, &name, quantity.as_deref(), choice)?;
                Ok(Vec::new())
            }
        }
    }

    fn add_item(&mut self, brand: &str, name: &str, quantity: Option<&str>, choice: Option<usize>) -> Result<(), SessionError> {
        if self.phase == SessionPhase::Done {
            return Err(SessionError::InvalidEvent("session is finished".into()));
        }
        let query = ProductQuery::new(brand, name, quantity)?;
        let mut shortlist = filter_catalog(&query, self.services.catalog.entries(), &self.cfg.filter)?;
        let offered: Vec<CandidateView> = shortlist
            .candidates
            .iter()
            .take(MAX_PRESENTED)
            .map(|c| CandidateView {
                barcode: c.entry.barcode.clone(),
                label: c.entry.display_name(),
                score: c.score,
            })
            .collect();
        let mut asked = false;
        let entry = resolve_product(&mut shortlist, |_| {
            asked = true;
            choice
        });
        let entry = match entry {
            Ok(e) => e,
            Err(CatalogError::SelectionAborted) if asked => return Err(SessionError::Ambiguous { candidates: offered }),
            Err(e) => return Err(e.into()),
        };
        let images = fetch_reference_images(&entry, self.services.images.as_ref())?;
        let reference = ReferenceDescriptor::from_images(&images, self.services.embedder.as_ref(), Some(&entry.barcode))
            .map_err(SimError::from)?;
        self.items.push(ListItem {
            cell: self.cfg.shelf.cell_of(&entry.barcode),
            label: entry.display_name(),
            barcode: entry.barcode,
            done: false,
        });
        self.references.push(Arc::new(reference));
        Ok(())
    }

    fn start_item(&mut self, index: Option<usize>) {
        self.current = index;
        self.touch.reset();
        self.last_cue = None;
        match index {
            Some(i) => {
                self.track = Some(TrackState::new(Arc::clone(&self.references[i])));
                self.phase = SessionPhase::Searching;
            }
            None => {
                self.track = None;
                self.phase = SessionPhase::Done;
            }
        }
    }

    fn next_open_item(&self) -> Option<usize> {
        self.items.iter().position(|i| !i.done)
    }

    fn frame(&self) -> SyntheticFrame {
        let mut frame = project_shelf(&self.cfg.shelf, &self.pose, self.cfg.intrinsics);
        frame.index = self.frame_idx;
        frame.noise_key = stable_hash(&[b"session", &self.frame_idx.to_le_bytes()]);
        frame.hand = self.hand;
        frame
    }

    fn step(&mut self) -> SessionMessage {
        if self.phase == SessionPhase::Listing {
            self.start_item(self.next_open_item());
        }
        let frame = self.frame();
        let boxes = frame.cell_boxes();
        let hand = observe_hand(&frame, &super::SyntheticHand);
        let mut cue = None;
        let mut touch = None;
        if let (Some(track), Some(index)) = (self.track.as_mut(), self.current) {
            let detector = SyntheticDetector { noise: self.cfg.noise };
            let matcher = FusionMatcher {
                embedder: Arc::clone(&self.services.embedder),
                cfg: self.cfg.matching,
            };
            let prompt = DetectionPrompt::default();
            let mut deps = TrackDeps {
                detector: &detector,
                tracker: &mut self.tracker,
                matcher: &matcher,
                prompt: &prompt,
            };
            let outcome = advance(track, &frame, &mut deps, &self.cfg.track);
            let located = matches!(outcome.phase, TrackPhase::Locked | TrackPhase::Revalidating);
            match (self.phase, located) {
                (SessionPhase::Searching, true) => self.phase = SessionPhase::Navigating,
                (SessionPhase::Navigating | SessionPhase::Correcting, false) if outcome.phase == TrackPhase::Searching => {
                    self.phase = SessionPhase::Searching;
                    self.touch.reset();
                }
                _ => {}
            }
            let grid = ZoneGrid::new(frame.width() as f64, frame.height() as f64);
            if self.phase != SessionPhase::Searching {
                cue = track
                    .anchor_bbox
                    .and_then(|b| guidance_cue(&hand, b.center(), &grid, &self.cfg.sonification).ok());
                let fired = self.touch.update(self.frame_idx, hand.fingertip, &boxes);
                touch = self.touch.progress().map(|t| TouchView { cell: t.product_cell, dwell_ms: t.dwell_ms });
                if let Some(event) = fired {
                    self.on_touch(index, event.product_cell, &frame);
                } else if self.phase == SessionPhase::Correcting && touch.is_none() {
                    self.phase = SessionPhase::Navigating;
                }
            }
        }
        if cue.is_some() {
            self.last_cue = cue.clone();
        }
        let message = SessionMessage {
            proto_version: PROTO_VERSION,
            frame_idx: self.frame_idx,
            phase: self.phase,
            scene: Scene {
                width: frame.width(),
                height: frame.height(),
                pose: self.pose,
                products: frame
                    .visible()
                    .map(|(v, b)| SceneProduct {
                        cell: v.cell,
                        barcode: v.barcode.clone(),
                        name: self.cfg.shelf.product(v.cell).map(|p| p.label()).unwrap_or_default(),
                        bbox: b,
                    })
                    .collect(),
                hand: hand.fingertip,
                target: self.track.as_ref().and_then(|t| t.anchor_bbox),
                touch,
            },
            sonification: cue.as_ref().and_then(|c| c.sonification),
            cue,
            advice: self.last_advice.clone(),
        };
        self.frame_idx += 1;
        message
    }

    fn on_touch(&mut self, index: usize, touched: ShelfCell, frame: &SyntheticFrame) {
        let item = &self.items[index];
        let Some(target) = item.cell else { return };
        if touched == target {
            self.last_advice = Some(ReasonerAnswer {
                text: CONFIRMED_PHRASE.to_string(),
                parsed: ParsedReply::Confirmed,
                source: AnswerSource::Geometric,
            });
            self.items[index].done = true;
            self.start_item(self.next_open_item());
            return;
        }
        let name = |c: ShelfCell| self.cfg.shelf.product(c).map(|p| p.label()).unwrap_or_default();
        let query = SpatialQuery::Correction {
            grid: self.cfg.shelf.grid(),
            target: ProductRef::new(name(target)).with_cell(target),
            touched: ProductRef::new(name(touched)).with_cell(touched),
        };
        let image = self.services.reasoner.remote.is_some().then(|| frame.render());
        match self.services.reasoner.answer(&query, image.as_ref()) {
            Ok(answer) => {
                self.last_advice = Some(answer);
                self.phase = SessionPhase::Correcting;
            }
            Err(err) => tracing::warn!(%err, "no correction advice"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{CatalogEntry, MemoryImageSource};
    use crate::matching::SyntheticEmbedder;
    use crate::simulator::reference_image;

    fn services() -> SessionServices {
        let shelf = ShelfSpec::default();
        let mut images = MemoryImageSource::new();
        let mut entries = Vec::new();
        for p in &shelf.products {
            entries.push(CatalogEntry::new(&p.barcode, &p.brand, &p.name, None, vec!["0.png".into()]).unwrap());
            images.insert(p.barcode.clone(), vec![reference_image(p)]);
        }
        SessionServices {
            catalog: Arc::new(Catalog::from_entries(entries).unwrap()),
            images: Arc::new(images),
            embedder: Arc::new(SyntheticEmbedder::new(7, 0.0)),
            reasoner: Arc::new(Reasoner::geometric()),
        }
    }

    fn session() -> GuidanceSession {
        let cfg = SessionConfig {
            noise: NoiseModel::none(7),
            tracker_jitter_px: 0.0,
            ..SessionConfig::default()
        };
        GuidanceSession::new(cfg, services()).unwrap()
    }

    fn query(brand: &str, name: &str) -> SessionEvent {
        SessionEvent::ListQuery {
            brand: brand.into(),
            name: name.into(),
            quantity: None,
            choice: None,
        }
    }

    fn tick(s: &mut GuidanceSession, frames: u32) -> Vec<SessionMessage> {
        s.apply(SessionEvent::Tick { frames }).unwrap()
    }

    fn center_of(s: &GuidanceSession, cell: ShelfCell) -> Point {
        s.frame().view(cell).unwrap().bbox.unwrap().center()
    }

    fn hold(s: &mut GuidanceSession, p: Point, frames: u32) -> Vec<SessionMessage> {
        let mut out = s.apply(SessionEvent::HandMove { position: Some(p) }).unwrap();
        if frames > 1 {
            out.extend(tick(s, frames - 1));
        }
        out
    }

    #[test]
    fn empty_list_completes_on_first_tick() {
        let mut s = session();
        assert_eq!(s.phase(), SessionPhase::Listing);
        let m = tick(&mut s, 1);
        assert_eq!(m[0].phase, SessionPhase::Done);
        assert_eq!(m[0].proto_version, PROTO_VERSION);
    }

    #[test]
    fn search_then_navigate_with_zone_cue() {
        let mut s = session();
        s.apply(query("Spindrift", "Unsweetened Lime Sparkling Water")).unwrap();
        assert_eq!(s.snapshot().shopping_list[0].cell, Some(ShelfCell::new(2, 5)));
        let m = tick(&mut s, 2);
        assert_eq!(m[0].phase, SessionPhase::Navigating);
        let cue = m[1].cue.as_ref().unwrap();
        assert_eq!(cue.phrase, "Right, lower");
        assert!(m[1].sonification.is_none());
        // hand appears: sonification follows the fingertip
        let left = s.apply(SessionEvent::HandMove { position: Some(Point::new(100.0, 360.0)) }).unwrap();
        let right = s.apply(SessionEvent::HandMove { position: Some(Point::new(900.0, 500.0)) }).unwrap();
        let (l, r) = (left[0].sonification.unwrap(), right[0].sonification.unwrap());
        assert!(l.pan > 0.0 && l.pitch_hz < r.pitch_hz, "{l:?} {r:?}");
        let idx: Vec<u64> = m.iter().chain(&left).chain(&right).map(|m| m.frame_idx).collect();
        assert_eq!(idx, vec![0, 1, 2, 3]);
    }

    #[test]
    fn touching_the_target_for_three_seconds_moves_on() {
        let mut s = session();
        s.apply(query("Stok", "Cold Brew Coffee Unsweetened")).unwrap();
        s.apply(query("Ritz", "Original Crackers")).unwrap();
        tick(&mut s, 1);
        let target = center_of(&s, ShelfCell::new(1, 4));
        let msgs = hold(&mut s, target, 89);
        assert!(msgs.iter().all(|m| m.phase == SessionPhase::Navigating));
        let last = hold(&mut s, target, 1);
        assert_eq!(last[0].advice.as_ref().unwrap().text, CONFIRMED_PHRASE);
        assert_eq!(last[0].phase, SessionPhase::Searching);
        let snap = s.snapshot();
        assert!(snap.shopping_list[0].done && !snap.shopping_list[1].done);
        assert_eq!(snap.current, Some(1));
    }

    #[test]
    fn wrong_touch_gives_the_correction_phrase() {
        let mut s = session();
        s.apply(query("Simply", "Lemonade with Strawberry")).unwrap();
        tick(&mut s, 1);
        let wrong = center_of(&s, ShelfCell::new(1, 4));
        let mut msgs = s.apply(SessionEvent::HandMove { position: Some(wrong) }).unwrap();
        msgs.extend(tick(&mut s, 89));
        let last = msgs.last().unwrap();
        assert_eq!(last.phase, SessionPhase::Correcting);
        assert_eq!(last.advice.as_ref().unwrap().text, "Two products to the left, one product down");
        assert_eq!(s.snapshot().current, Some(0));
        // leaving the product returns to navigation
        let m = s.apply(SessionEvent::HandMove { position: None }).unwrap();
        assert_eq!(m[0].phase, SessionPhase::Navigating);
    }

    #[test]
    fn ambiguous_and_unknown_queries() {
        let mut s = session();
        let err = s.apply(query("Spindrift", "Sparkling Water")).unwrap_err();
        assert!(matches!(err, SessionError::Catalog(CatalogError::EmptyShortlist)), "{err}");
        assert!(matches!(s.apply(query("", "x")), Err(SessionError::Catalog(CatalogError::InvalidQuery(_)))));
        assert!(matches!(s.apply(SessionEvent::Tick { frames: 0 }), Err(SessionError::InvalidEvent(_))));
        let bad_pose = SessionEvent::CameraMove { radius_m: -1.0, azimuth_deg: 0.0, pan_deg: None, tilt_deg: None };
        assert!(matches!(s.apply(bad_pose), Err(SessionError::InvalidEvent(_))));
    }

    #[test]
    fn ambiguous_request_lists_candidates_until_a_choice_is_made() {
        let mut svc = services();
        let mut entries: Vec<CatalogEntry> = svc.catalog.entries().to_vec();
        entries.push(CatalogEntry::new("0000000000001", "Ritz", "Original Cracker", None, vec!["0.png".into()]).unwrap());
        svc.catalog = Arc::new(Catalog::from_entries(entries).unwrap());
        let mut s = GuidanceSession::new(SessionConfig::default(), svc).unwrap();
        let Err(SessionError::Ambiguous { candidates }) = s.apply(query("Ritz", "Original Crackers")) else { panic!("expected ambiguity") };
        assert_eq!(candidates.len(), 2);
        let pick = candidates.iter().position(|c| c.barcode == "0044000032029").unwrap();
        s.apply(SessionEvent::ListQuery { brand: "Ritz".into(), name: "Original Crackers".into(), quantity: None, choice: Some(pick) })
            .unwrap();
        assert_eq!(s.snapshot().shopping_list[0].barcode, "0044000032029");
    }

    #[test]
    fn event_json_format() {
        let e: SessionEvent = serde_json::from_str(r#"{"type":"hand_move","position":{"x":1.0,"y":2.0}}"#).unwrap();
        assert_eq!(e, SessionEvent::HandMove { position: Some(Point::new(1.0, 2.0)) });
        let e: SessionEvent = serde_json::from_str(r#"{"type":"hand_move","position":null}"#).unwrap();
        assert_eq!(e, SessionEvent::HandMove { position: None });
        let e: SessionEvent = serde_json::from_str(r#"{"type":"tick"}"#).unwrap();
        assert_eq!(e, SessionEvent::Tick { frames: 1 });
        let e: SessionEvent = serde_json::from_str(r#"{"type":"camera_move","radius_m":1.5,"azimuth_deg":-30}"#).unwrap();
        assert!(matches!(e, SessionEvent::CameraMove { pan_deg: None, .. }));
        assert!(serde_json::from_str::<SessionEvent>(r#"{"type":"jump"}"#).is_err());
        assert!(serde_json::from_str::<SessionEvent>(r#"{"type":"tick","frame":2}"#).is_err());
    }

    #[test]
    fn message_json_shape() {
        let mut s = session();
        s.apply(query("Ritz", "Original Crackers")).unwrap();
        let m = tick(&mut s, 2).pop().unwrap();
        let v = serde_json::to_value(&m).unwrap();
        for key in ["proto_version", "frame_idx", "phase", "scene", "cue", "sonification", "advice"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["phase"], "navigating");
        assert_eq!(v["scene"]["products"].as_array().unwrap().len(), 18);
    }
}
