//! Banded joint CIELAB histograms and the Bhattacharyya coefficient.

use std::ops::Range;

use super::lab::{srgb_to_cielab, LabPixelGrid};
use super::{MatchConfig, MatchError, RgbImage};

pub const L_BINS: usize = 16;
pub const A_BINS: usize = 10;
pub const B_BINS: usize = 10;
pub const LAB_BINS: usize = L_BINS * A_BINS * B_BINS;

/// Horizontal band of a product crop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Band {
    Top,
    Middle,
    Bottom,
}

impl Band {
    pub const ALL: [Band; 3] = [Band::Top, Band::Middle, Band::Bottom];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Row ranges of the three bands. Remainder rows go to the top band first,
/// then the middle band.
pub fn band_rows(height: usize) -> Result<[Range<usize>; 3], MatchError> {
    if height < 3 {
        return Err(MatchError::ImageTooSmall { height });
    }
    let base = height / 3;
    let rem = height % 3;
    let top = base + usize::from(rem > 0);
    let middle = base + usize::from(rem > 1);
    Ok([0..top, top..top + middle, top + middle..height])
}

/// Splits a grid into its top, middle and bottom row bands.
pub fn band_partition(grid: &LabPixelGrid) -> Result<[&[[f64; 3]]; 3], MatchError> {
    let w = grid.width as usize;
    let rows = band_rows(grid.height as usize)?;
    Ok(rows.map(|r| &grid.values[r.start * w..r.end * w]))
}

/// Histogram mass vector plus the number of pixels it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bins: Vec<f64>,
    pub pixel_count: u64,
}

impl Histogram {
    pub fn zeros(len: usize) -> Self {
        Self {
            bins: vec![0.0; len],
            pixel_count: 0,
        }
    }

    /// Wraps arbitrary bin masses (used for small hand-made distributions).
    pub fn from_masses(bins: Vec<f64>) -> Self {
        Self { bins, pixel_count: 0 }
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.bins.iter().sum()
    }

    pub fn is_all_zero(&self) -> bool {
        self.bins.iter().all(|&b| b == 0.0)
    }
}

fn bin_of(value: f64, lo: f64, hi: f64, n: usize) -> usize {
    let t = ((value - lo) / (hi - lo) * n as f64).floor();
    (t.max(0.0) as usize).min(n - 1)
}

/// Joint 16×10×10 histogram over `L* ∈ [0,100]`, `a*, b* ∈ [-128,128)`,
/// normalized to unit sum. An empty band yields an all-zero histogram.
pub fn band_histogram(pixels: &[[f64; 3]]) -> Histogram {
    let mut hist = Histogram::zeros(LAB_BINS);
    if pixels.is_empty() {
        return hist;
    }
    for &[l, a, b] in pixels {
        let li = bin_of(l, 0.0, 100.0, L_BINS);
        let ai = bin_of(a, -128.0, 128.0, A_BINS);
        let bi = bin_of(b, -128.0, 128.0, B_BINS);
        hist.bins[(li * A_BINS + ai) * B_BINS + bi] += 1.0;
    }
    let n = pixels.len() as f64;
    hist.bins.iter_mut().for_each(|v| *v /= n);
    hist.pixel_count = pixels.len() as u64;
    hist
}

/// `Σ √(cᵢ·rᵢ)`, clamped to `[0, 1]`; zero when either side is all-zero.
pub fn bhattacharyya(c: &Histogram, r: &Histogram) -> Result<f64, MatchError> {
    if c.len() != r.len() {
        return Err(MatchError::ShapeMismatch {
            left: c.len(),
            right: r.len(),
        });
    }
    if c.is_all_zero() || r.is_all_zero() {
        return Ok(0.0);
    }
    let s: f64 = c
        .bins
        .iter()
        .zip(&r.bins)
        .map(|(a, b)| (a * b).sqrt())
        .sum();
    Ok(s.clamp(0.0, 1.0))
}

/// Top, middle and bottom histograms of one image.
#[derive(Debug, Clone, PartialEq)]
pub struct BandHistogramSet {
    pub bands: [Histogram; 3],
}

impl BandHistogramSet {
    pub fn from_grid(grid: &LabPixelGrid) -> Result<Self, MatchError> {
        let parts = band_partition(grid)?;
        Ok(Self {
            bands: parts.map(band_histogram),
        })
    }

    pub fn from_image(image: &RgbImage) -> Result<Self, MatchError> {
        Self::from_grid(&srgb_to_cielab(image))
    }

    pub fn band(&self, band: Band) -> &Histogram {
        &self.bands[band.index()]
    }
}

/// Result of the banded color comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColorScore {
    pub s_color: f64,
    /// Bhattacharyya coefficient per band, 0 for dropped bands.
    pub per_band: [f64; 3],
    /// Weights actually used after dropping empty bands.
    pub effective_weights: [f64; 3],
}

/// Weighted band similarity. A band that is empty in either set is dropped
/// and the remaining weights are rescaled to sum to one; with no usable band
/// the score is zero.
pub fn color_similarity(
    crop: &BandHistogramSet,
    reference: &BandHistogramSet,
    cfg: &MatchConfig,
) -> Result<ColorScore, MatchError> {
    let weights = cfg.band_weights();
    let mut per_band = [0.0; 3];
    let mut effective = [0.0; 3];
    for band in Band::ALL {
        let (c, r) = (crop.band(band), reference.band(band));
        let k = band.index();
        per_band[k] = bhattacharyya(c, r)?;
        if c.pixel_count > 0 && r.pixel_count > 0 && !c.is_all_zero() && !r.is_all_zero() {
            effective[k] = weights[k];
        }
    }
    let total: f64 = effective.iter().sum();
    if total <= 0.0 {
        return Ok(ColorScore {
            s_color: 0.0,
            per_band,
            effective_weights: [0.0; 3],
        });
    }
    effective.iter_mut().for_each(|w| *w /= total);
    let s_color = effective.iter().zip(&per_band).map(|(w, s)| w * s).sum::<f64>();
    Ok(ColorScore {
        s_color: s_color.clamp(0.0, 1.0),
        per_band,
        effective_weights: effective,
    })
}
