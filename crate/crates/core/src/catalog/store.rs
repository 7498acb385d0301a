use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CatalogEntry, CatalogError};

/// One line of the newline-delimited JSON catalog file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogRecord {
    pub barcode: String,
    pub brand: String,
    pub product_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantity: Option<String>,
    #[serde(default)]
    pub image_urls: Vec<String>,
}

impl From<&CatalogEntry> for CatalogRecord {
    fn from(e: &CatalogEntry) -> Self {
        Self {
            barcode: e.barcode.clone(),
            brand: e.brand.clone(),
            product_name: e.name.clone(),
            quantity: e.quantity.clone(),
            image_urls: e.image_refs.clone(),
        }
    }
}

/// Immutable, barcode-keyed product catalog.
#[derive(Debug, Clone, Default)]
pub struct Catalog {
    entries: Vec<CatalogEntry>,
    by_barcode: HashMap<String, usize>,
}

impl Catalog {
    pub fn from_entries(entries: Vec<CatalogEntry>) -> Result<Self, CatalogError> {
        let mut by_barcode = HashMap::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            if by_barcode.insert(e.barcode.clone(), i).is_some() {
                return Err(CatalogError::DuplicateBarcode(e.barcode.clone()));
            }
        }
        Ok(Self { entries, by_barcode })
    }

    /// Parses JSON lines; blank lines are skipped.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self, CatalogError> {
        let mut entries = Vec::new();
        for (i, line) in BufReader::new(reader).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: CatalogRecord = serde_json::from_str(&line).map_err(|e| CatalogError::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
            let entry = CatalogEntry::new(
                &rec.barcode,
                &rec.brand,
                &rec.product_name,
                rec.quantity.as_deref(),
                rec.image_urls,
            )
            .map_err(|e| CatalogError::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
            entries.push(entry);
        }
        Self::from_entries(entries)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CatalogError> {
        Self::from_reader(std::fs::File::open(path)?)
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn get(&self, barcode: &str) -> Option<&CatalogEntry> {
        self.by_barcode.get(barcode).map(|&i| &self.entries[i])
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_jsonl(&self) -> String {
        self.entries
            .iter()
            .map(|e| serde_json::to_string(&CatalogRecord::from(e)).expect("record serializes") + "\n")
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_records_and_rejects_duplicates() {
        let text = r#"{"barcode":"0123","brand":"Oreo","product_name":"Chocolate Sandwich Cookies","quantity":"14.3 oz","image_urls":["a.png"]}

{"barcode":"0456","brand":"Ritz","product_name":"Crackers"}
"#;
        let cat = Catalog::from_reader(text.as_bytes()).unwrap();
        assert_eq!(cat.len(), 2);
        assert_eq!(cat.get("0123").unwrap().normalized_name(), "chocolate sandwich cookies");
        assert!(cat.get("0456").unwrap().image_refs.is_empty());
        let round = Catalog::from_reader(cat.to_jsonl().as_bytes()).unwrap();
        assert_eq!(round.entries(), cat.entries());

        let dup = format!("{}{}", cat.to_jsonl(), cat.to_jsonl());
        assert!(matches!(Catalog::from_reader(dup.as_bytes()), Err(CatalogError::DuplicateBarcode(_))));
    }

    #[test]
    fn reports_bad_lines() {
        let err = Catalog::from_reader("{\"barcode\":\"12\"}\n".as_bytes()).unwrap_err();
        assert!(matches!(err, CatalogError::Parse { line: 1, .. }));
        let err = Catalog::from_reader(
            "{\"barcode\":\"12a\",\"brand\":\"x\",\"product_name\":\"y\"}\n".as_bytes(),
        )
        .unwrap_err();
        assert!(matches!(err, CatalogError::Parse { line: 1, .. }));
    }
}
