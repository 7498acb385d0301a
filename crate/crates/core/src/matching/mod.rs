//! Target matching: fuses embedding cosine similarity with banded CIELAB
//! histogram similarity and picks the best detection crop.

mod cache;
mod embedding;
mod histogram;
mod image;
mod lab;

use rayon::prelude::*;
use thiserror::Error;

pub use cache::{decode_reference, encode_reference, ReferenceCache, CACHE_MAGIC, CACHE_VERSION};
pub use embedding::{cosine_similarity, stable_hash, Embedder, Embedding, SyntheticEmbedder, DEFAULT_DIM};
pub use histogram::{
    band_histogram, band_partition, band_rows, bhattacharyya, color_similarity, Band,
    BandHistogramSet, ColorScore, Histogram, LAB_BINS,
};
pub use image::RgbImage;
pub(crate) use image::pixel_window;
pub use lab::{srgb_pixel_to_lab, srgb_to_cielab, LabPixelGrid};

/// Absolute tolerance for score comparisons.
pub const SCORE_EPS: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum MatchError {
    #[error("invalid image: {0}")]
    InvalidImage(String),
    #[error("image too small to split into bands (height {height})")]
    ImageTooSmall { height: usize },
    #[error("histogram shapes differ ({left} vs {right} bins)")]
    ShapeMismatch { left: usize, right: usize },
    #[error("embedding dimensions differ ({left} vs {right})")]
    DimensionMismatch { left: usize, right: usize },
    #[error("embedding has zero or non-finite norm")]
    DegenerateEmbedding,
    #[error("invalid match config: {0}")]
    InvalidConfig(String),
    #[error("no reference images")]
    NoReferenceImages,
    #[error("reference cache: {0}")]
    Cache(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatchConfig {
    pub w_top: f64,
    pub w_middle: f64,
    pub w_bottom: f64,
    /// Weight of the embedding score in the fused score.
    pub alpha: f64,
    /// Crops whose embedding similarity is below this are skipped.
    pub embed_gate: f64,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            w_top: 0.3,
            w_middle: 0.4,
            w_bottom: 0.3,
            alpha: 0.70,
            embed_gate: 0.50,
        }
    }
}

impl MatchConfig {
    pub fn band_weights(&self) -> [f64; 3] {
        [self.w_top, self.w_middle, self.w_bottom]
    }

    pub fn validate(&self) -> Result<(), MatchError> {
        let w = self.band_weights();
        if w.iter().any(|x| !(0.0..=1.0).contains(x)) || (w.iter().sum::<f64>() - 1.0).abs() > SCORE_EPS {
            return Err(MatchError::InvalidConfig(format!("band weights {w:?} must be a convex combination")));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(MatchError::InvalidConfig(format!("alpha {} outside [0, 1]", self.alpha)));
        }
        Ok(())
    }
}

/// `α·s_embed + (1−α)·s_color`.
pub fn fuse_scores(s_embed: f64, s_color: f64, cfg: &MatchConfig) -> f64 {
    cfg.alpha * s_embed + (1.0 - cfg.alpha) * s_color
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MatchScore {
    pub s_embed: f64,
    /// Per-band Bhattacharyya coefficients `(S_T, S_M, S_B)`.
    pub s_band: [f64; 3],
    pub s_color: f64,
    pub s_final: f64,
}

/// Descriptors of the product being looked for.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceDescriptor {
    pub embedding: Embedding,
    pub bands: BandHistogramSet,
}

impl ReferenceDescriptor {
    /// Embedding is the normalized mean over all images; histograms come from
    /// the first image.
    pub fn from_images(
        images: &[RgbImage],
        embedder: &dyn Embedder,
        identity: Option<&str>,
    ) -> Result<Self, MatchError> {
        let first = images.first().ok_or(MatchError::NoReferenceImages)?;
        let embeddings = images
            .iter()
            .map(|img| embedder.embed(img, identity))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            embedding: Embedding::mean(&embeddings)?,
            bands: BandHistogramSet::from_image(first)?,
        })
    }
}

/// A detection's image region, ready for scoring.
#[derive(Debug, Clone)]
pub struct Crop {
    pub detection_id: u32,
    pub image: RgbImage,
    pub identity_hint: Option<String>,
}

/// Full score of one crop against the reference, without the embedding gate.
pub fn score_crop(
    crop: &Crop,
    reference: &ReferenceDescriptor,
    embedder: &dyn Embedder,
    cfg: &MatchConfig,
) -> Result<MatchScore, MatchError> {
    let s_embed = cosine_similarity(
        &embedder.embed(&crop.image, crop.identity_hint.as_deref())?,
        &reference.embedding,
    )?;
    finish_score(s_embed, crop, reference, cfg)
}

fn finish_score(
    s_embed: f64,
    crop: &Crop,
    reference: &ReferenceDescriptor,
    cfg: &MatchConfig,
) -> Result<MatchScore, MatchError> {
    let bands = BandHistogramSet::from_image(&crop.image)?;
    let color = color_similarity(&bands, &reference.bands, cfg)?;
    Ok(MatchScore {
        s_embed,
        s_band: color.per_band,
        s_color: color.s_color,
        s_final: fuse_scores(s_embed, color.s_color, cfg),
    })
}

fn better(a: &(u32, MatchScore), b: &(u32, MatchScore)) -> bool {
    let d = a.1.s_final - b.1.s_final;
    d > SCORE_EPS || (d.abs() <= SCORE_EPS && a.0 < b.0)
}

/// Picks the crop with the highest fused score among those passing the
/// embedding gate. Gated crops never reach the color stage. Crops that cannot
/// be scored (e.g. fewer than three rows) are skipped. Ties go to the lowest
/// detection id.
pub fn match_detections(
    crops: &[Crop],
    reference: &ReferenceDescriptor,
    embedder: &dyn Embedder,
    cfg: &MatchConfig,
) -> Option<(u32, MatchScore)> {
    crops
        .par_iter()
        .filter_map(|crop| {
            let emb = embedder.embed(&crop.image, crop.identity_hint.as_deref()).ok()?;
            let s_embed = cosine_similarity(&emb, &reference.embedding).ok()?;
            if s_embed + SCORE_EPS < cfg.embed_gate {
                return None;
            }
            match finish_score(s_embed, crop, reference, cfg) {
                Ok(score) => Some((crop.detection_id, score)),
                Err(err) => {
                    tracing::debug!(detection = crop.detection_id, %err, "crop skipped");
                    None
                }
            }
        })
        .collect::<Vec<_>>()
        .into_iter()
        .reduce(|best, cand| if better(&cand, &best) { cand } else { best })
}
