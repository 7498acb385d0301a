use std::io::Cursor;

use crate::geometry::BBox;

use super::MatchError;

/// Row-major 8-bit sRGB image.
#[derive(Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl std::fmt::Debug for RgbImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "RgbImage({}x{})", self.width, self.height)
    }
}

impl RgbImage {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self, MatchError> {
        if width == 0 || height == 0 {
            return Err(MatchError::InvalidImage("zero-sized image".into()));
        }
        let expected = 3 * width as usize * height as usize;
        if data.len() != expected {
            return Err(MatchError::InvalidImage(format!(
                "buffer holds {} bytes, expected {expected}",
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    /// # Panics
    /// Panics on a zero dimension.
    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Self {
        Self::from_fn(width, height, |_, _| rgb)
    }

    /// # Panics
    /// Panics on a zero dimension.
    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut data = Vec::with_capacity(3 * width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self { width, height, data }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.data
    }

    pub fn pixels(&self) -> impl Iterator<Item = [u8; 3]> + '_ {
        self.data.chunks_exact(3).map(|p| [p[0], p[1], p[2]])
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = 3 * (y as usize * self.width as usize + x as usize);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn put_pixel(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = 3 * (y as usize * self.width as usize + x as usize);
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    /// Integer pixel window covered by `bbox` after clipping to the image:
    /// `(x0, y0, x1, y1)` with exclusive upper bounds.
    pub fn pixel_window(&self, bbox: &BBox) -> Option<(u32, u32, u32, u32)> {
        let clipped = bbox.clip(self.width as f64, self.height as f64)?;
        pixel_window(&clipped, self.width, self.height)
    }

    pub fn crop(&self, bbox: &BBox) -> Option<RgbImage> {
        let (x0, y0, x1, y1) = self.pixel_window(bbox)?;
        let w = x1 - x0;
        let mut data = Vec::with_capacity(3 * (w * (y1 - y0)) as usize);
        for y in y0..y1 {
            let start = 3 * (y as usize * self.width as usize + x0 as usize);
            data.extend_from_slice(&self.data[start..start + 3 * w as usize]);
        }
        Some(Self {
            width: w,
            height: y1 - y0,
            data,
        })
    }

    pub fn decode_png(bytes: &[u8]) -> Result<Self, MatchError> {
        let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
            .map_err(|e| MatchError::InvalidImage(e.to_string()))?
            .to_rgb8();
        let (w, h) = img.dimensions();
        Self::new(w, h, img.into_raw())
    }

    pub fn encode_png(&self) -> Vec<u8> {
        let buf = image::RgbImage::from_raw(self.width, self.height, self.data.clone())
            .expect("buffer length is an invariant");
        let mut out = Cursor::new(Vec::new());
        buf.write_to(&mut out, image::ImageFormat::Png)
            .expect("in-memory PNG encoding");
        out.into_inner()
    }
}

/// Rounds a clipped box outward to whole pixels.
pub(crate) fn pixel_window(bbox: &BBox, width: u32, height: u32) -> Option<(u32, u32, u32, u32)> {
    let x0 = bbox.x.floor().max(0.0) as u32;
    let y0 = bbox.y.floor().max(0.0) as u32;
    let x1 = (bbox.right().ceil() as u32).min(width);
    let y1 = (bbox.bottom().ceil() as u32).min(height);
    (x1 > x0 && y1 > y0).then_some((x0, y0, x1, y1))
}
