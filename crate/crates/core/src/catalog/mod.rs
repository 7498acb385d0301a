//! Shopping-list resolution: normalize the user's request, filter the
//! catalog by brand, name and quantity, rank the survivors and fetch the
//! chosen product's reference images.

mod source;
mod store;
mod text;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use source::{
    fetch_reference_images, FetchError, FixtureImageSource, HttpImageSource, ImageSource,
    MemoryImageSource,
};
pub use store::{Catalog, CatalogRecord};
pub use text::{fuzzy_similarity, normalize_text, tokens};

/// Slack applied to threshold comparisons so that values equal to a threshold
/// up to rounding still pass.
const THRESHOLD_EPS: f64 = 1e-9;

/// Maximum number of candidates offered to the user when more than one survives.
pub const MAX_PRESENTED: usize = 3;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("query {0} is empty after normalization")]
    InvalidQuery(&'static str),
    #[error("no catalog entry passed every filter stage")]
    EmptyShortlist,
    #[error("selection aborted by user")]
    SelectionAborted,
    #[error("product {barcode} has no usable reference images")]
    NoUsableImages { barcode: String },
    #[error("image source unavailable: {0}")]
    SourceUnavailable(String),
    #[error("catalog line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate barcode {0}")]
    DuplicateBarcode(String),
    #[error("invalid barcode {0:?}: must be a non-empty digit string")]
    InvalidBarcode(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A product request as spoken (or typed) by the user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawQuery", into = "RawQuery")]
pub struct ProductQuery {
    brand: String,
    name: String,
    quantity: Option<String>,
    norm_brand: String,
    norm_name: String,
    norm_quantity: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawQuery {
    brand: String,
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    quantity: Option<String>,
}

impl TryFrom<RawQuery> for ProductQuery {
    type Error = CatalogError;

    fn try_from(raw: RawQuery) -> Result<Self, Self::Error> {
        ProductQuery::new(&raw.brand, &raw.name, raw.quantity.as_deref())
    }
}

impl From<ProductQuery> for RawQuery {
    fn from(q: ProductQuery) -> Self {
        RawQuery {
            brand: q.brand,
            name: q.name,
            quantity: q.quantity,
        }
    }
}

impl ProductQuery {
    /// Builds a query; a quantity that normalizes to nothing counts as absent.
    pub fn new(brand: &str, name: &str, quantity: Option<&str>) -> Result<Self, CatalogError> {
        let norm_brand = normalize_text(brand);
        if norm_brand.is_empty() {
            return Err(CatalogError::InvalidQuery("brand"));
        }
        let norm_name = normalize_text(name);
        if norm_name.is_empty() {
            return Err(CatalogError::InvalidQuery("name"));
        }
        let norm_quantity = quantity.map(normalize_text).filter(|q| !q.is_empty());
        Ok(Self {
            brand: brand.to_string(),
            name: name.to_string(),
            quantity: norm_quantity.as_ref().and(quantity.map(str::to_string)),
            norm_brand,
            norm_name,
            norm_quantity,
        })
    }

    pub fn brand(&self) -> &str {
        &self.brand
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn quantity(&self) -> Option<&str> {
        self.quantity.as_deref()
    }

    /// Same request without the quantity stage.
    pub fn without_quantity(&self) -> Self {
        Self {
            quantity: None,
            norm_quantity: None,
            ..self.clone()
        }
    }
}

/// A catalog record with both raw and normalized text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub barcode: String,
    pub brand: String,
    pub name: String,
    pub quantity: Option<String>,
    pub image_refs: Vec<String>,
    #[serde(skip)]
    norm_brand: String,
    #[serde(skip)]
    norm_name: String,
    #[serde(skip)]
    norm_quantity: Option<String>,
}

impl CatalogEntry {
    pub fn new(
        barcode: &str,
        brand: &str,
        name: &str,
        quantity: Option<&str>,
        image_refs: Vec<String>,
    ) -> Result<Self, CatalogError> {
        if barcode.is_empty() || !barcode.bytes().all(|b| b.is_ascii_digit()) {
            return Err(CatalogError::InvalidBarcode(barcode.to_string()));
        }
        Ok(Self {
            barcode: barcode.to_string(),
            brand: brand.to_string(),
            name: name.to_string(),
            quantity: quantity.map(str::to_string),
            image_refs,
            norm_brand: normalize_text(brand),
            norm_name: normalize_text(name),
            norm_quantity: quantity.map(normalize_text),
        })
    }

    pub fn normalized_brand(&self) -> &str {
        &self.norm_brand
    }

    pub fn normalized_name(&self) -> &str {
        &self.norm_name
    }

    /// Human-readable "Brand Name (quantity)" label.
    pub fn display_name(&self) -> String {
        match &self.quantity {
            Some(q) => format!("{} {} ({q})", self.brand, self.name),
            None => format!("{} {}", self.brand, self.name),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    pub brand_threshold: f64,
    pub name_threshold: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            brand_threshold: 0.60,
            name_threshold: 0.65,
        }
    }
}

/// `true` when `similarity` reaches `threshold`.
pub fn passes_threshold(similarity: f64, threshold: f64) -> bool {
    similarity + THRESHOLD_EPS >= threshold
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub entry: CatalogEntry,
    pub brand_similarity: f64,
    pub name_similarity: f64,
    /// `None` when the query carried no quantity and the stage was skipped.
    pub quantity_similarity: Option<f64>,
    /// Mean of the stage similarities that were applied.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Shortlist {
    pub candidates: Vec<Candidate>,
    pub selected: Option<usize>,
}

impl Shortlist {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn top(&self) -> Option<&Candidate> {
        self.candidates.first()
    }
}

fn quantity_matches(query: &str, entry: Option<&str>) -> bool {
    let Some(entry) = entry else { return false };
    let available: Vec<&str> = tokens(entry).collect();
    tokens(query).all(|t| available.contains(&t))
}

/// Runs the brand → name → quantity filter cascade and ranks survivors by
/// descending aggregate score, ties broken by ascending barcode.
pub fn filter_catalog(
    query: &ProductQuery,
    entries: &[CatalogEntry],
    cfg: &FilterConfig,
) -> Result<Shortlist, CatalogError> {
    let mut candidates: Vec<Candidate> = entries
        .iter()
        .filter_map(|entry| {
            let brand = fuzzy_similarity(&query.norm_brand, &entry.norm_brand);
            if !passes_threshold(brand, cfg.brand_threshold) {
                return None;
            }
            let name = fuzzy_similarity(&query.norm_name, &entry.norm_name);
            if !passes_threshold(name, cfg.name_threshold) {
                return None;
            }
            let quantity = match &query.norm_quantity {
                Some(q) if quantity_matches(q, entry.norm_quantity.as_deref()) => Some(1.0),
                Some(_) => return None,
                None => None,
            };
            let (sum, n) = match quantity {
                Some(q) => (brand + name + q, 3.0),
                None => (brand + name, 2.0),
            };
            Some(Candidate {
                entry: entry.clone(),
                brand_similarity: brand,
                name_similarity: name,
                quantity_similarity: quantity,
                score: sum / n,
            })
        })
        .collect();
    if candidates.is_empty() {
        return Err(CatalogError::EmptyShortlist);
    }
    candidates.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.entry.barcode.cmp(&b.entry.barcode))
    });
    Ok(Shortlist {
        candidates,
        selected: None,
    })
}

/// Picks the product from a shortlist. A single candidate is taken without
/// asking; otherwise the top three are offered to `choose`, which returns an
/// index into the offered slice or `None` to abort.
pub fn resolve_product<F>(shortlist: &mut Shortlist, mut choose: F) -> Result<CatalogEntry, CatalogError>
where
    F: FnMut(&[Candidate]) -> Option<usize>,
{
    let index = match shortlist.candidates.len() {
        0 => return Err(CatalogError::EmptyShortlist),
        1 => 0,
        n => {
            let offered = &shortlist.candidates[..n.min(MAX_PRESENTED)];
            match choose(offered) {
                Some(i) if i < offered.len() => i,
                _ => return Err(CatalogError::SelectionAborted),
            }
        }
    };
    shortlist.selected = Some(index);
    Ok(shortlist.candidates[index].entry.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(barcode: &str, brand: &str, name: &str, qty: Option<&str>) -> CatalogEntry {
        CatalogEntry::new(barcode, brand, name, qty, vec![]).unwrap()
    }

    fn sample() -> Vec<CatalogEntry> {
        vec![
            entry("0001", "Spindrift", "Lime Sparkling Water", Some("12 fl oz")),
            entry("0002", "Spindrift", "Grapefruit Sparkling Water", Some("12 fl oz")),
            entry("0003", "LaCroix", "Lime Sparkling Water", Some("12 fl oz")),
            entry("0004", "Simply", "Lemonade with Strawberry", Some("52 fl oz")),
            entry("0005", "Spindrift", "Lime Sparkling Water", Some("8 pack")),
        ]
    }

    #[test]
    fn spindrift_query_ranks_target_first() {
        let q = ProductQuery::new("spindrift", "lime sparkling water", None).unwrap();
        let list = filter_catalog(&q, &sample(), &FilterConfig::default()).unwrap();
        let top = list.top().unwrap();
        assert_eq!(top.entry.normalized_name(), "lime sparkling water");
        assert_eq!(top.entry.brand, "Spindrift");
        // 0001 and 0005 tie at score 1.0, broken by barcode
        assert_eq!(list.candidates[0].entry.barcode, "0001");
        assert_eq!(list.candidates[1].entry.barcode, "0005");
        assert!(list.candidates.windows(2).all(|w| w[0].score >= w[1].score));
    }

    #[test]
    fn quantity_stage_only_when_given() {
        let q = ProductQuery::new("spindrift", "lime sparkling water", None).unwrap();
        let all = filter_catalog(&q, &sample(), &FilterConfig::default()).unwrap();
        assert!(all.candidates.iter().all(|c| c.quantity_similarity.is_none()));
        let with_qty = ProductQuery::new("spindrift", "lime sparkling water", Some("8 Pack")).unwrap();
        let list = filter_catalog(&with_qty, &sample(), &FilterConfig::default()).unwrap();
        assert_eq!(list.len(), 1);
        assert_eq!(list.candidates[0].entry.barcode, "0005");
        assert_eq!(list.candidates[0].score, 1.0);
    }

    #[test]
    fn two_survivors_without_quantity_are_both_kept() {
        let entries = vec![
            entry("0010", "Chobani", "Greek Yogurt Plain", Some("32 oz")),
            entry("0011", "Chobani", "Greek Yogurt Plain", Some("5.3 oz")),
        ];
        let q = ProductQuery::new("Chobani", "greek yogurt plain", None).unwrap();
        let list = filter_catalog(&q, &entries, &FilterConfig::default()).unwrap();
        assert_eq!(list.len(), 2);
    }

    #[test]
    fn brand_below_threshold_gives_empty_shortlist() {
        // "abcdefghij" vs "abcdwxyzij": 4 substitutions over 10 chars -> 0.6
        // "abcdefghij" vs "abcvwxyzij": 5 substitutions -> 0.5
        let entries = vec![entry("1", "abcdwxyzij", "milk", None)];
        let pass = ProductQuery::new("abcdefghij", "milk", None).unwrap();
        assert_eq!(filter_catalog(&pass, &entries, &FilterConfig::default()).unwrap().len(), 1);
        let fail = ProductQuery::new("abcvefghij", "milk", None).unwrap();
        assert!(matches!(
            filter_catalog(&fail, &entries, &FilterConfig::default()),
            Err(CatalogError::EmptyShortlist)
        ));
    }

    #[test]
    fn threshold_gate_boundary() {
        assert!(passes_threshold(0.600, 0.60));
        assert!(!passes_threshold(0.599, 0.60));
        assert!(passes_threshold(0.650, 0.65));
        assert!(!passes_threshold(0.649, 0.65));
        assert!(passes_threshold(1.0 - 0.4, 0.60));
    }

    #[test]
    fn empty_query_fields_rejected() {
        assert!(matches!(ProductQuery::new("!!", "milk", None), Err(CatalogError::InvalidQuery("brand"))));
        assert!(matches!(ProductQuery::new("a", "  ", None), Err(CatalogError::InvalidQuery("name"))));
        assert_eq!(ProductQuery::new("a", "b", Some("  ")).unwrap().quantity(), None);
    }

    #[test]
    fn resolve_single_candidate_skips_callback() {
        let q = ProductQuery::new("simply", "lemonade with strawberry", None).unwrap();
        let mut list = filter_catalog(&q, &sample(), &FilterConfig::default()).unwrap();
        let got = resolve_product(&mut list, |_| panic!("callback must not run")).unwrap();
        assert_eq!(got.barcode, "0004");
        assert_eq!(list.selected, Some(0));
    }

    #[test]
    fn resolve_offers_top_three() {
        let candidates = (0..5)
            .map(|i| Candidate {
                entry: entry(&format!("{i}"), "b", "n", None),
                brand_similarity: 1.0,
                name_similarity: 1.0,
                quantity_similarity: None,
                score: 1.0 - i as f64 * 0.1,
            })
            .collect();
        let mut list = Shortlist { candidates, selected: None };
        let mut offered = 0;
        let got = resolve_product(&mut list, |opts| {
            offered = opts.len();
            Some(2)
        })
        .unwrap();
        assert_eq!(offered, 3);
        assert_eq!(got.barcode, "2");
        assert!(matches!(resolve_product(&mut list, |_| None), Err(CatalogError::SelectionAborted)));
        assert!(matches!(resolve_product(&mut list, |_| Some(3)), Err(CatalogError::SelectionAborted)));
    }
}
