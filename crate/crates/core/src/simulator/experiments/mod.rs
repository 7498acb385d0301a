//! Replications of the four evaluation protocols against synthetic ground truth.

mod catalog;
mod correction;
mod detection;
mod navigation;

use std::collections::HashMap;
use std::sync::Arc;

pub use catalog::{inject_typo, run_catalog_experiment, CatalogCase, CatalogRow, CatalogTable, CatalogTrial, QueryVariant};
pub use correction::{
    brute_force_expectation, correction_trials, run_correction_experiment, CorrectionCase, CorrectionTable,
    CorrectionTrial, ShelfConfiguration,
};
pub use detection::{
    default_pose_grid, run_detection_experiment, sweep_pose, DetectionCondition, DetectionOutcome, DetectionRow,
    DetectionSettings, DetectionTable, DetectionTrial,
};
pub use navigation::{brute_force_zone, run_navigation_experiment, NavigationTable, NavigationTrial};

use super::{reference_image, ShelfSpec, SimError};
use crate::catalog::{fetch_reference_images, Catalog, ImageSource};
use crate::matching::{Embedder, ReferenceDescriptor};

/// Reference descriptors for every shelf product, keyed by barcode.
#[derive(Clone)]
pub struct ReferenceSet {
    pub embedder: Arc<dyn Embedder>,
    refs: HashMap<String, Arc<ReferenceDescriptor>>,
}

impl ReferenceSet {
    /// References rendered straight from the shelf spec.
    pub fn synthetic(shelf: &ShelfSpec, embedder: Arc<dyn Embedder>) -> Result<Self, SimError> {
        let mut refs = HashMap::new();
        for p in &shelf.products {
            let d = ReferenceDescriptor::from_images(&[reference_image(p)], embedder.as_ref(), Some(&p.barcode))?;
            refs.insert(p.barcode.clone(), Arc::new(d));
        }
        Ok(Self { embedder, refs })
    }

    /// References fetched for the resolved catalog entry of every shelf product.
    pub fn from_catalog(
        shelf: &ShelfSpec,
        catalog: &Catalog,
        source: &dyn ImageSource,
        embedder: Arc<dyn Embedder>,
    ) -> Result<Self, SimError> {
        let mut refs = HashMap::new();
        for p in &shelf.products {
            let entry = catalog
                .get(&p.barcode)
                .ok_or_else(|| SimError::Config(format!("shelf product {} missing from catalog", p.barcode)))?;
            let images = fetch_reference_images(entry, source)?;
            let d = ReferenceDescriptor::from_images(&images, embedder.as_ref(), Some(&p.barcode))?;
            refs.insert(p.barcode.clone(), Arc::new(d));
        }
        Ok(Self { embedder, refs })
    }

    pub fn get(&self, barcode: &str) -> Option<&Arc<ReferenceDescriptor>> {
        self.refs.get(barcode)
    }
}

/// "94.4%" style, one decimal.
pub fn percent(correct: usize, total: usize) -> String {
    if total == 0 {
        return "n/a".into();
    }
    format!("{:.1}%", 100.0 * correct as f64 / total as f64)
}

/// Metres without trailing zeros: 1.0 → "1", 1.5 → "1.5".
pub fn metres(m: f64) -> String {
    let s = format!("{m:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

pub(crate) fn csv_string(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    for r in rows {
        w.write_record(&r).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting() {
        assert_eq!(percent(34, 36), "94.4%");
        assert_eq!(percent(36, 36), "100.0%");
        assert_eq!(metres(1.0), "1");
        assert_eq!(metres(1.5), "1.5");
        assert_eq!(metres(0.25), "0.25");
        assert_eq!(csv_string(&["a", "b"], vec![vec!["1".into(), "x,y".into()]]), "a,b\n1,\"x,y\"\n");
    }
}
