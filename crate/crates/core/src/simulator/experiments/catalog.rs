use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{csv_string, percent};
use crate::catalog::{fetch_reference_images, filter_catalog, resolve_product, Catalog, FilterConfig, ImageSource, ProductQuery};
use crate::matching::stable_hash;

/// One line of the query fixture: the request and the product it means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogCase {
    pub category: String,
    pub barcode: String,
    pub brand: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantity: Option<String>,
}

impl CatalogCase {
    pub fn parse_jsonl(text: &str) -> Result<Vec<Self>, serde_json::Error> {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryVariant {
    Exact,
    /// One seeded keyboard slip in the brand or the name.
    Typo,
}

/// Applies one edit (substitution, deletion, insertion or adjacent
/// transposition) at a letter of `text`, chosen by `rng`.
pub fn inject_typo(text: &str, rng: &mut impl Rng) -> String {
    let mut chars: Vec<char> = text.chars().collect();
    let letters: Vec<usize> = (0..chars.len()).filter(|&i| chars[i].is_alphabetic()).collect();
    if letters.is_empty() {
        return text.to_string();
    }
    let i = letters[rng.random_range(0..letters.len())];
    let random_letter = |rng: &mut dyn rand::RngCore, not: char| loop {
        let c = (b'a' + rng.random_range(0..26u8)) as char;
        if c != not.to_ascii_lowercase() {
            return c;
        }
    };
    match rng.random_range(0..4u8) {
        0 => chars[i] = random_letter(rng, chars[i]),
        1 if letters.len() > 1 => {
            chars.remove(i);
        }
        2 => {
            let c = random_letter(rng, '\0');
            chars.insert(i, c);
        }
        _ if i + 1 < chars.len() && chars[i + 1].is_alphabetic() && chars[i + 1] != chars[i] => chars.swap(i, i + 1),
        _ => chars[i] = random_letter(rng, chars[i]),
    }
    chars.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogTrial {
    pub category: String,
    pub barcode: String,
    pub brand: String,
    pub name: String,
    /// `None` on success, otherwise the failing stage.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogRow {
    pub category: String,
    pub correct: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogTable {
    pub variant: QueryVariant,
    pub rows: Vec<CatalogRow>,
    pub trials: Vec<CatalogTrial>,
}

impl CatalogTable {
    pub const HEADER: [&'static str; 4] = ["Category", "Correct", "Total", "Accuracy"];

    pub fn correct(&self) -> usize {
        self.rows.iter().map(|r| r.correct).sum()
    }

    pub fn total(&self) -> usize {
        self.rows.iter().map(|r| r.total).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| vec![r.category.clone(), r.correct.to_string(), r.total.to_string(), percent(r.correct, r.total)])
            .collect();
        let (c, n) = (self.correct(), self.total());
        rows.push(vec!["Total".into(), c.to_string(), n.to_string(), percent(c, n)]);
        csv_string(&Self::HEADER, rows)
    }

    pub fn summary(&self) -> String {
        let mut s = format!("Catalog search ({:?})\n", self.variant);
        for r in &self.rows {
            s.push_str(&format!("  {:<16} {:>2}/{:<2} {:>6}\n", r.category, r.correct, r.total, percent(r.correct, r.total)));
        }
        s.push_str(&format!("  {:<16} {:>2}/{:<2} {:>6}\n", "Total", self.correct(), self.total(), percent(self.correct(), self.total())));
        for t in self.trials.iter().filter(|t| t.error.is_some()) {
            s.push_str(&format!("  miss {} \"{} {}\": {}\n", t.barcode, t.brand, t.name, t.error.as_deref().unwrap_or("")));
        }
        s
    }
}

/// Resolves every case; a simulated user picks the intended product when it
/// is among the offered candidates. A trial counts as correct when that
/// product is resolved and its reference images can be fetched.
pub fn run_catalog_experiment(
    catalog: &Catalog,
    cases: &[CatalogCase],
    source: &dyn ImageSource,
    filter: &FilterConfig,
    variant: QueryVariant,
    seed: u64,
) -> CatalogTable {
    let mut trials = Vec::with_capacity(cases.len());
    for case in cases {
        let (mut brand, mut name) = (case.brand.clone(), case.name.clone());
        if variant == QueryVariant::Typo {
            let mut rng = ChaCha8Rng::seed_from_u64(stable_hash(&[b"typo", &seed.to_le_bytes(), case.barcode.as_bytes()]));
            // field chosen in proportion to its letters
            let nb = brand.chars().filter(|c| c.is_alphabetic()).count();
            let nn = name.chars().filter(|c| c.is_alphabetic()).count();
            if rng.random_range(0..(nb + nn).max(1)) < nb {
                brand = inject_typo(&brand, &mut rng);
            } else {
                name = inject_typo(&name, &mut rng);
            }
        }
        let error = resolve_case(catalog, case, &brand, &name, source, filter).err();
        trials.push(CatalogTrial {
            category: case.category.clone(),
            barcode: case.barcode.clone(),
            brand,
            name,
            error,
        });
    }
    let mut rows: Vec<CatalogRow> = Vec::new();
    for t in &trials {
        let row = match rows.iter_mut().position(|r| r.category == t.category) {
            Some(i) => &mut rows[i],
            None => {
                rows.push(CatalogRow { category: t.category.clone(), correct: 0, total: 0 });
                rows.last_mut().expect("just pushed")
            }
        };
        row.total += 1;
        row.correct += t.error.is_none() as usize;
    }
    CatalogTable { variant, rows, trials }
}

fn resolve_case(
    catalog: &Catalog,
    case: &CatalogCase,
    brand: &str,
    name: &str,
    source: &dyn ImageSource,
    filter: &FilterConfig,
) -> Result<(), String> {
    let query = ProductQuery::new(brand, name, case.quantity.as_deref()).map_err(|e| e.to_string())?;
    let mut shortlist = filter_catalog(&query, catalog.entries(), filter).map_err(|e| e.to_string())?;
    let entry = resolve_product(&mut shortlist, |offered| offered.iter().position(|c| c.entry.barcode == case.barcode))
        .map_err(|e| e.to_string())?;
    if entry.barcode != case.barcode {
        return Err(format!("resolved {} instead", entry.barcode));
    }
    fetch_reference_images(&entry, source).map_err(|e| e.to_string())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{CatalogEntry, MemoryImageSource};
    use crate::matching::RgbImage;
    use proptest::prelude::*;

    fn setup() -> (Catalog, MemoryImageSource, Vec<CatalogCase>) {
        let rows = [
            ("0001", "Spindrift", "Lime Sparkling Water", "Drinks"),
            ("0002", "Spindrift", "Grapefruit Sparkling Water", "Drinks"),
            ("0003", "Ritz", "Original Crackers", "Snacks"),
        ];
        let mut src = MemoryImageSource::new();
        let mut entries = Vec::new();
        let mut cases = Vec::new();
        for (b, brand, name, cat) in rows {
            entries.push(CatalogEntry::new(b, brand, name, None, vec![format!("{b}/0.png")]).unwrap());
            src.insert(b, vec![RgbImage::filled(3, 3, [1, 2, 3])]);
            cases.push(CatalogCase { category: cat.into(), barcode: b.into(), brand: brand.into(), name: name.into(), quantity: None });
        }
        (Catalog::from_entries(entries).unwrap(), src, cases)
    }

    #[test]
    fn exact_queries_resolve_and_group_by_category() {
        let (cat, src, cases) = setup();
        let t = run_catalog_experiment(&cat, &cases, &src, &FilterConfig::default(), QueryVariant::Exact, 1);
        assert_eq!(t.correct(), 3);
        assert_eq!(t.to_csv(), "Category,Correct,Total,Accuracy\nDrinks,2,2,100.0%\nSnacks,1,1,100.0%\nTotal,3,3,100.0%\n");
    }

    #[test]
    fn missing_images_fail_the_trial() {
        let (cat, _, cases) = setup();
        let t = run_catalog_experiment(&cat, &cases, &MemoryImageSource::new(), &FilterConfig::default(), QueryVariant::Exact, 1);
        assert_eq!(t.correct(), 0);
        assert!(t.trials[0].error.as_deref().unwrap().contains("no usable reference images"));
    }

    #[test]
    fn typo_variant_is_seeded() {
        let (cat, src, cases) = setup();
        let a = run_catalog_experiment(&cat, &cases, &src, &FilterConfig::default(), QueryVariant::Typo, 5);
        let b = run_catalog_experiment(&cat, &cases, &src, &FilterConfig::default(), QueryVariant::Typo, 5);
        assert_eq!(a, b);
        assert!(a.trials.iter().all(|t| format!("{} {}", t.brand, t.name) != format!("{} {}", cases.iter().find(|c| c.barcode == t.barcode).unwrap().brand, cases.iter().find(|c| c.barcode == t.barcode).unwrap().name)));
    }

    proptest! {
        #[test]
        fn typo_is_one_or_two_edits(text in "[A-Za-z]{2,12}( [A-Za-z]{1,8}){0,3}", seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = inject_typo(&text, &mut rng);
            let d = strsim::levenshtein(&text, &t);
            // transposition costs two plain edits
            prop_assert!((1..=2).contains(&d), "{text:?} -> {t:?}");
        }
    }
}
