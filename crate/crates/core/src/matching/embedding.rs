//! Appearance embeddings and the bundled synthetic encoder.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::lab::srgb_pixel_to_lab;
use super::{MatchError, RgbImage};

pub const DEFAULT_DIM: usize = 576;

/// Unit-norm feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding(Vec<f64>);

impl Embedding {
    /// Normalizes `v` to unit length.
    pub fn new(v: Vec<f64>) -> Result<Self, MatchError> {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(MatchError::DegenerateEmbedding);
        }
        Ok(Self(v.into_iter().map(|x| x / norm).collect()))
    }

    /// Normalized mean of several embeddings of equal dimension.
    pub fn mean(items: &[Embedding]) -> Result<Self, MatchError> {
        let first = items.first().ok_or(MatchError::DegenerateEmbedding)?;
        let mut acc = vec![0.0; first.dim()];
        for e in items {
            if e.dim() != acc.len() {
                return Err(MatchError::DimensionMismatch {
                    left: acc.len(),
                    right: e.dim(),
                });
            }
            acc.iter_mut().zip(&e.0).for_each(|(a, x)| *a += x);
        }
        Self::new(acc)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Dot product of two unit vectors, clamped to `[-1, 1]`.
pub fn cosine_similarity(a: &Embedding, b: &Embedding) -> Result<f64, MatchError> {
    if a.dim() != b.dim() {
        return Err(MatchError::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let dot: f64 = a.0.iter().zip(&b.0).map(|(x, y)| x * y).sum();
    Ok(dot.clamp(-1.0, 1.0))
}

/// Image encoder producing unit vectors of a fixed dimension.
///
/// `identity_hint` carries ground-truth product identity when the image comes
/// from the simulator; encoders that look only at pixels ignore it.
pub trait Embedder: Send + Sync {
    fn dim(&self) -> usize;
    fn embed(&self, image: &RgbImage, identity_hint: Option<&str>) -> Result<Embedding, MatchError>;
}

/// 64-bit FNV-1a, stable across platforms and toolchains.
pub fn stable_hash(parts: &[&[u8]]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for part in parts {
        for &b in *part {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        // separator so ("ab","c") != ("a","bc")
        h ^= 0xff;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn gaussian_vector(seed: u64, dim: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect()
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n == 0.0 {
        v
    } else {
        v.into_iter().map(|x| x / n).collect()
    }
}

/// Deterministic stand-in for a neural encoder.
///
/// The vector mixes a pseudo-random direction keyed by product identity with
/// a fixed random projection of per-band mean color. Perturbation noise is
/// keyed by the pixel content and grows as the image gets smaller, so tiny
/// crops match less reliably.
#[derive(Debug, Clone)]
pub struct SyntheticEmbedder {
    pub dim: usize,
    pub seed: u64,
    /// Share of the identity direction versus the color projection.
    pub identity_weight: f64,
    /// Noise norm at or above `reference_pixels` pixels.
    pub perturbation: f64,
    pub reference_pixels: f64,
    projection: Vec<f64>,
}

impl SyntheticEmbedder {
    const COLOR_FEATURES: usize = 9;

    pub fn new(seed: u64, perturbation: f64) -> Self {
        Self::with_dim(DEFAULT_DIM, seed, perturbation)
    }

    pub fn with_dim(dim: usize, seed: u64, perturbation: f64) -> Self {
        let projection = gaussian_vector(
            stable_hash(&[b"projection", &seed.to_le_bytes()]),
            dim * Self::COLOR_FEATURES,
        );
        Self {
            dim,
            seed,
            identity_weight: 0.85,
            perturbation,
            reference_pixels: 4096.0,
            projection,
        }
    }

    /// Mean `(L*/100, a*/128, b*/128)` of the top, middle and bottom thirds.
    fn color_features(image: &RgbImage) -> [f64; 9] {
        let mut sums = [0.0; 9];
        let mut counts = [0usize; 3];
        let h = image.height() as usize;
        for (i, px) in image.pixels().enumerate() {
            let row = i / image.width() as usize;
            let band = (row * 3 / h).min(2);
            let [l, a, b] = srgb_pixel_to_lab(px);
            sums[band * 3] += l / 100.0;
            sums[band * 3 + 1] += a / 128.0;
            sums[band * 3 + 2] += b / 128.0;
            counts[band] += 1;
        }
        for band in 0..3 {
            let n = counts[band].max(1) as f64;
            for k in 0..3 {
                sums[band * 3 + k] /= n;
            }
        }
        sums
    }
}

impl Embedder for SyntheticEmbedder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, image: &RgbImage, identity_hint: Option<&str>) -> Result<Embedding, MatchError> {
        let features = Self::color_features(image);
        let identity_seed = match identity_hint {
            Some(id) => stable_hash(&[b"identity", &self.seed.to_le_bytes(), id.as_bytes()]),
            // unknown content gets its own arbitrary direction
            None => stable_hash(&[b"anonymous", &self.seed.to_le_bytes(), image.as_bytes()]),
        };
        let identity = unit(gaussian_vector(identity_seed, self.dim));
        let color = unit(
            (0..self.dim)
                .map(|d| {
                    let row = &self.projection[d * Self::COLOR_FEATURES..(d + 1) * Self::COLOR_FEATURES];
                    row.iter().zip(&features).map(|(p, f)| p * f).sum()
                })
                .collect(),
        );
        let w = self.identity_weight;
        let mut v: Vec<f64> = identity
            .iter()
            .zip(&color)
            .map(|(i, c)| w * i + (1.0 - w) * c)
            .collect();
        if self.perturbation > 0.0 {
            let pixels = image.pixel_count() as f64;
            let scale = self.perturbation * (self.reference_pixels / pixels).sqrt().max(1.0);
            let noise_seed = stable_hash(&[b"noise", &self.seed.to_le_bytes(), image.as_bytes()]);
            let per_component = scale / (self.dim as f64).sqrt();
            for (x, n) in v.iter_mut().zip(gaussian_vector(noise_seed, self.dim)) {
                *x += per_component * n;
            }
        }
        Embedding::new(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn striped(colors: [[u8; 3]; 3], w: u32, h: u32) -> RgbImage {
        RgbImage::from_fn(w, h, |_, y| colors[(y * 3 / h) as usize])
    }

    #[test]
    fn cosine_worked_examples() {
        let a = Embedding::new(vec![1.0, 0.0, 0.0]).unwrap();
        let b = Embedding::new(vec![0.0, 2.0, 0.0]).unwrap();
        let neg = Embedding::new(vec![-3.0, 0.0, 0.0]).unwrap();
        assert_eq!(cosine_similarity(&a, &a).unwrap(), 1.0);
        assert_eq!(cosine_similarity(&a, &b).unwrap(), 0.0);
        assert_eq!(cosine_similarity(&a, &neg).unwrap(), -1.0);
        let short = Embedding::new(vec![1.0, 0.0]).unwrap();
        assert!(matches!(cosine_similarity(&a, &short), Err(MatchError::DimensionMismatch { .. })));
        assert!(Embedding::new(vec![0.0; 4]).is_err());
    }

    #[test]
    fn embeddings_are_unit_norm() {
        let e = SyntheticEmbedder::new(3, 0.2);
        let v = e.embed(&RgbImage::filled(8, 9, [1, 2, 3]), Some("x")).unwrap();
        let n: f64 = v.as_slice().iter().map(|x| x * x).sum();
        assert_eq!(v.dim(), DEFAULT_DIM);
        assert!((n - 1.0).abs() < 1e-6);
    }

    #[test]
    fn synthetic_embedder_separates_identities() {
        let e = SyntheticEmbedder::new(11, 0.0);
        let a = striped([[200, 0, 0], [0, 200, 0], [0, 0, 200]], 30, 60);
        let a_small = striped([[200, 0, 0], [0, 200, 0], [0, 0, 200]], 12, 21);
        let b = striped([[250, 250, 0], [0, 0, 0], [250, 250, 250]], 30, 60);
        let ref_a = e.embed(&a, Some("a")).unwrap();
        let same = cosine_similarity(&ref_a, &e.embed(&a_small, Some("a")).unwrap()).unwrap();
        let other = cosine_similarity(&ref_a, &e.embed(&b, Some("b")).unwrap()).unwrap();
        let anon = cosine_similarity(&ref_a, &e.embed(&a, None).unwrap()).unwrap();
        assert!(same > 0.99, "{same}");
        assert!(other < 0.5, "{other}");
        assert!(anon < 0.5, "{anon}");
        // deterministic
        assert_eq!(e.embed(&a, Some("a")).unwrap(), ref_a);
    }

    #[test]
    fn perturbation_grows_for_small_crops() {
        let e = SyntheticEmbedder::new(5, 0.6);
        let clean = SyntheticEmbedder::new(5, 0.0);
        let img_big = RgbImage::filled(80, 80, [90, 90, 30]);
        let img_small = RgbImage::filled(10, 10, [90, 90, 30]);
        let big = cosine_similarity(&clean.embed(&img_big, Some("p")).unwrap(), &e.embed(&img_big, Some("p")).unwrap()).unwrap();
        let small = cosine_similarity(&clean.embed(&img_small, Some("p")).unwrap(), &e.embed(&img_small, Some("p")).unwrap()).unwrap();
        assert!(small < big, "{small} vs {big}");
    }

    #[test]
    fn mean_embedding() {
        let a = Embedding::new(vec![1.0, 0.0]).unwrap();
        let b = Embedding::new(vec![0.0, 1.0]).unwrap();
        let m = Embedding::mean(&[a, b]).unwrap();
        assert!((m.as_slice()[0] - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(Embedding::mean(&[]).is_err());
    }
}
