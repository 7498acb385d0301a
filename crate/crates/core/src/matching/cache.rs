//! Versioned binary cache of reference descriptors, one blob per product.
//!
//! Layout (little endian): magic `SGREF`, u16 version, u16 barcode length,
//! barcode bytes, u32 embedding dimension, f64 values, then for each of the
//! three bands: u64 pixel count, u32 bin count, f64 values.

use std::io::{Cursor, Read, Write};
use std::path::{Path, PathBuf};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::{BandHistogramSet, Embedding, Histogram, MatchError, ReferenceDescriptor};

pub const CACHE_MAGIC: &[u8; 5] = b"SGREF";
pub const CACHE_VERSION: u16 = 1;

pub fn encode_reference(barcode: &str, desc: &ReferenceDescriptor) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(CACHE_MAGIC);
    out.write_u16::<LittleEndian>(CACHE_VERSION).unwrap();
    out.write_u16::<LittleEndian>(barcode.len() as u16).unwrap();
    out.extend_from_slice(barcode.as_bytes());
    let emb = desc.embedding.as_slice();
    out.write_u32::<LittleEndian>(emb.len() as u32).unwrap();
    emb.iter().for_each(|v| out.write_f64::<LittleEndian>(*v).unwrap());
    for hist in &desc.bands.bands {
        out.write_u64::<LittleEndian>(hist.pixel_count).unwrap();
        out.write_u32::<LittleEndian>(hist.bins.len() as u32).unwrap();
        hist.bins.iter().for_each(|v| out.write_f64::<LittleEndian>(*v).unwrap());
    }
    out
}

fn read_f64s(r: &mut Cursor<&[u8]>, n: usize) -> std::io::Result<Vec<f64>> {
    (0..n).map(|_| r.read_f64::<LittleEndian>()).collect()
}

pub fn decode_reference(bytes: &[u8]) -> Result<(String, ReferenceDescriptor), MatchError> {
    let bad = |e: std::io::Error| MatchError::Cache(format!("truncated blob: {e}"));
    let mut r = Cursor::new(bytes);
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic).map_err(bad)?;
    if &magic != CACHE_MAGIC {
        return Err(MatchError::Cache("bad magic header".into()));
    }
    let version = r.read_u16::<LittleEndian>().map_err(bad)?;
    if version != CACHE_VERSION {
        return Err(MatchError::Cache(format!("unsupported version {version}")));
    }
    let len = r.read_u16::<LittleEndian>().map_err(bad)? as usize;
    let mut code = vec![0u8; len];
    r.read_exact(&mut code).map_err(bad)?;
    let barcode = String::from_utf8(code).map_err(|e| MatchError::Cache(e.to_string()))?;
    let dim = r.read_u32::<LittleEndian>().map_err(bad)? as usize;
    let embedding = Embedding::new(read_f64s(&mut r, dim).map_err(bad)?)?;
    let mut bands = Vec::with_capacity(3);
    for _ in 0..3 {
        let pixel_count = r.read_u64::<LittleEndian>().map_err(bad)?;
        let n = r.read_u32::<LittleEndian>().map_err(bad)? as usize;
        bands.push(Histogram {
            bins: read_f64s(&mut r, n).map_err(bad)?,
            pixel_count,
        });
    }
    if (r.position() as usize) != bytes.len() {
        return Err(MatchError::Cache("trailing bytes".into()));
    }
    let bands: [Histogram; 3] = bands.try_into().expect("three bands read");
    Ok((
        barcode,
        ReferenceDescriptor {
            embedding,
            bands: BandHistogramSet { bands },
        },
    ))
}

/// Directory of `<barcode>.ref` blobs.
#[derive(Debug, Clone)]
pub struct ReferenceCache {
    dir: PathBuf,
}

impl ReferenceCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    fn path(&self, barcode: &str) -> PathBuf {
        self.dir.join(format!("{barcode}.ref"))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn store(&self, barcode: &str, desc: &ReferenceDescriptor) -> Result<(), MatchError> {
        std::fs::create_dir_all(&self.dir)?;
        let mut f = std::fs::File::create(self.path(barcode))?;
        f.write_all(&encode_reference(barcode, desc))?;
        Ok(())
    }

    pub fn load(&self, barcode: &str) -> Result<Option<ReferenceDescriptor>, MatchError> {
        let bytes = match std::fs::read(self.path(barcode)) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let (stored, desc) = decode_reference(&bytes)?;
        if stored != barcode {
            return Err(MatchError::Cache(format!("blob keyed {stored}, expected {barcode}")));
        }
        Ok(Some(desc))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::{RgbImage, SyntheticEmbedder};

    fn descriptor() -> ReferenceDescriptor {
        let img = RgbImage::from_fn(12, 10, |x, y| [x as u8 * 20, y as u8 * 25, 100]);
        ReferenceDescriptor::from_images(&[img], &SyntheticEmbedder::new(1, 0.0), Some("42")).unwrap()
    }

    #[test]
    fn blob_round_trip_and_validation() {
        let d = descriptor();
        let blob = encode_reference("0042", &d);
        let (code, back) = decode_reference(&blob).unwrap();
        assert_eq!(code, "0042");
        assert_eq!(back, d);

        let mut wrong = blob.clone();
        wrong[0] = b'X';
        assert!(decode_reference(&wrong).is_err());
        assert!(decode_reference(&blob[..blob.len() - 3]).is_err());
        let mut newer = blob.clone();
        newer[5] = 9;
        assert!(matches!(decode_reference(&newer), Err(MatchError::Cache(m)) if m.contains("version")));
    }

    #[test]
    fn directory_cache() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ReferenceCache::new(dir.path());
        assert!(cache.load("7").unwrap().is_none());
        cache.store("7", &descriptor()).unwrap();
        assert_eq!(cache.load("7").unwrap().unwrap(), descriptor());
    }
}
