//! Synthetic shelf world, camera projection, noise injection, the
//! evaluation protocols and the interactive guidance session.

mod camera;
mod config;
mod eval;
pub mod experiments;
mod frame;
mod noise;
mod session;
mod world;

pub use session::{
    CandidateView, GuidanceSession, ListItem, Scene, SceneProduct, SessionConfig, SessionError, SessionEvent,
    SessionMessage, SessionPhase, SessionServices, SessionSnapshot, TouchView, TrackSummary, MAX_TICK_FRAMES,
    PROTO_VERSION,
};
pub use eval::{run_evaluation, EvalReport, Experiment, Fixtures};
pub use config::{CameraConfig, CorrectionConfig, DetectionConfig, NavigationConfig, ReasonerConfig, ReasonerSource, ScenarioConfig, SCENARIO_VERSION};
pub use camera::{look_angles, Camera, CameraPose, Intrinsics};
pub use frame::{project_shelf, ProductView, SyntheticFrame, MIN_VISIBLE_FRACTION};
pub use noise::{look_alike, synthetic_detect, NoiseModel, SyntheticDetector, SyntheticHand};
pub use world::{FaceRect, Packaging, ShelfProduct, ShelfSpec, SizeClass, BACKGROUND, BOARD, PALETTE};

use crate::matching::RgbImage;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    Config(String),
    #[error(transparent)]
    Catalog(#[from] crate::catalog::CatalogError),
    #[error(transparent)]
    Match(#[from] crate::matching::MatchError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Pixel height of canonical product reference images.
pub const REFERENCE_HEIGHT: u32 = 120;

/// Straight-on catalog-style picture of a product: its three stripes,
/// proportioned like its front face.
pub fn reference_image(product: &ShelfProduct) -> RgbImage {
    let (w_m, h_m) = product.size.face_m();
    let h = REFERENCE_HEIGHT;
    let w = ((h as f64) * w_m / h_m).round().max(1.0) as u32;
    RgbImage::from_fn(w, h, |_, y| product.stripes[(y * 3 / h) as usize])
}
