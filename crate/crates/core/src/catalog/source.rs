//! Reference image sources keyed by barcode.

use std::collections::HashMap;
use std::path::PathBuf;
use std::time::Duration;

use thiserror::Error;

use super::{CatalogEntry, CatalogError};
use crate::matching::RgbImage;

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("image not found")]
    NotFound,
    #[error("image undecodable: {0}")]
    Undecodable(String),
    /// The source itself cannot be reached; worth retrying later.
    #[error("source unavailable: {0}")]
    Unavailable(String),
}

pub trait ImageSource: Send + Sync {
    /// Fetches the `index`-th reference image of `entry`.
    fn fetch(&self, entry: &CatalogEntry, index: usize) -> Result<RgbImage, FetchError>;
}

/// Fetches every reference image of `entry`, skipping missing or broken ones.
pub fn fetch_reference_images(
    entry: &CatalogEntry,
    source: &dyn ImageSource,
) -> Result<Vec<RgbImage>, CatalogError> {
    let mut images = Vec::with_capacity(entry.image_refs.len());
    for index in 0..entry.image_refs.len() {
        match source.fetch(entry, index) {
            Ok(img) => images.push(img),
            Err(FetchError::Unavailable(msg)) => return Err(CatalogError::SourceUnavailable(msg)),
            Err(err) => {
                tracing::warn!(barcode = %entry.barcode, index, %err, "skipping reference image");
            }
        }
    }
    if images.is_empty() {
        return Err(CatalogError::NoUsableImages {
            barcode: entry.barcode.clone(),
        });
    }
    Ok(images)
}

/// Reads `<root>/images/<barcode>/<n>.png`.
#[derive(Debug, Clone)]
pub struct FixtureImageSource {
    root: PathBuf,
}

impl FixtureImageSource {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }
}

impl ImageSource for FixtureImageSource {
    fn fetch(&self, entry: &CatalogEntry, index: usize) -> Result<RgbImage, FetchError> {
        let images = self.root.join("images");
        if !images.is_dir() {
            return Err(FetchError::Unavailable(format!("{} is not a directory", images.display())));
        }
        let path = images.join(&entry.barcode).join(format!("{index}.png"));
        let bytes = std::fs::read(&path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => FetchError::NotFound,
            _ => FetchError::Unavailable(format!("{}: {e}", path.display())),
        })?;
        RgbImage::decode_png(&bytes).map_err(|e| FetchError::Undecodable(e.to_string()))
    }
}

/// HTTP GET on a URL template. `{barcode}`, `{n}` and `{ref}` (the entry's
/// image locator) are substituted.
pub struct HttpImageSource {
    client: reqwest::blocking::Client,
    template: String,
}

impl HttpImageSource {
    pub fn new(template: impl Into<String>) -> Result<Self, FetchError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(10))
            .user_agent(concat!("shelfguide/", env!("CARGO_PKG_VERSION")))
            .build()
            .map_err(|e| FetchError::Unavailable(e.to_string()))?;
        Ok(Self {
            client,
            template: template.into(),
        })
    }

    pub fn url_for(&self, entry: &CatalogEntry, index: usize) -> String {
        self.template
            .replace("{barcode}", &entry.barcode)
            .replace("{n}", &index.to_string())
            .replace("{ref}", entry.image_refs.get(index).map_or("", String::as_str))
    }
}

impl ImageSource for HttpImageSource {
    fn fetch(&self, entry: &CatalogEntry, index: usize) -> Result<RgbImage, FetchError> {
        let url = self.url_for(entry, index);
        let resp = self
            .client
            .get(&url)
            .send()
            .map_err(|e| FetchError::Unavailable(e.to_string()))?;
        let status = resp.status();
        if status == reqwest::StatusCode::NOT_FOUND {
            return Err(FetchError::NotFound);
        }
        if status.is_server_error() {
            return Err(FetchError::Unavailable(format!("{url}: HTTP {status}")));
        }
        if !status.is_success() {
            return Err(FetchError::Undecodable(format!("{url}: HTTP {status}")));
        }
        let bytes = resp.bytes().map_err(|e| FetchError::Unavailable(e.to_string()))?;
        RgbImage::decode_png(&bytes).map_err(|e| FetchError::Undecodable(e.to_string()))
    }
}

/// In-memory images, used by the simulator and in tests.
#[derive(Debug, Clone, Default)]
pub struct MemoryImageSource {
    images: HashMap<String, Vec<RgbImage>>,
    pub online: bool,
}

impl MemoryImageSource {
    pub fn new() -> Self {
        Self {
            images: HashMap::new(),
            online: true,
        }
    }

    pub fn insert(&mut self, barcode: impl Into<String>, images: Vec<RgbImage>) {
        self.images.insert(barcode.into(), images);
    }
}

impl ImageSource for MemoryImageSource {
    fn fetch(&self, entry: &CatalogEntry, index: usize) -> Result<RgbImage, FetchError> {
        if !self.online {
            return Err(FetchError::Unavailable("memory source offline".into()));
        }
        self.images
            .get(&entry.barcode)
            .and_then(|v| v.get(index))
            .cloned()
            .ok_or(FetchError::NotFound)
    }
}
