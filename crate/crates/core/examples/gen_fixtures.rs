//! Regenerates `fixtures/`: an 80-entry catalog (4 categories x 20), the
//! matching query list and one reference PNG per product.
//!
//! cargo run -p shelfguide-core --example gen_fixtures -- fixtures

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shelfguide_core::catalog::{Catalog, CatalogEntry};
use shelfguide_core::matching::{stable_hash, RgbImage};
use shelfguide_core::simulator::experiments::CatalogCase;
use shelfguide_core::simulator::{reference_image, ShelfSpec, PALETTE, REFERENCE_HEIGHT};

// (brand, name, quantity) for products that are not on the simulated shelf
const DAIRY: [(&str, &str, Option<&str>); 20] = [
    ("Horizon Organic", "Whole Milk", Some("64 fl oz")),
    ("Horizon Organic", "Reduced Fat 2% Milk", Some("64 fl oz")),
    ("Fairlife", "Ultra-Filtered Chocolate Milk", Some("52 fl oz")),
    ("Chobani", "Plain Greek Yogurt", Some("32 oz")),
    ("Chobani", "Strawberry Greek Yogurt", Some("5.3 oz")),
    ("Fage", "Total 0% Greek Yogurt", Some("17.6 oz")),
    ("Yoplait", "Original Strawberry Yogurt", Some("6 oz")),
    ("Tillamook", "Medium Cheddar Cheese", Some("8 oz")),
    ("Kraft", "Singles American Cheese Slices", Some("12 oz")),
    ("Philadelphia", "Original Cream Cheese", Some("8 oz")),
    ("Sargento", "Shredded Mozzarella", Some("8 oz")),
    ("Babybel", "Mini Original Cheese", Some("6 ct")),
    ("Land O'Lakes", "Salted Butter", Some("16 oz")),
    ("Kerrygold", "Pure Irish Butter", Some("8 oz")),
    ("Eggland's Best", "Large Brown Eggs", Some("12 ct")),
    ("Vital Farms", "Pasture-Raised Large Eggs", Some("12 ct")),
    ("Daisy", "Pure and Natural Sour Cream", Some("16 oz")),
    ("Silk", "Original Almond Milk", Some("64 fl oz")),
    ("Oatly", "Oat Milk Original", Some("64 fl oz")),
    ("Coffee mate", "French Vanilla Creamer", Some("32 fl oz")),
];

const PANTRY: [(&str, &str, Option<&str>); 15] = [
    ("Cheerios", "Honey Nut", Some("10.8 oz")),
    ("Barilla", "Penne Rigate", Some("16 oz")),
    ("Campbell's", "Chicken Noodle Soup", Some("10.75 oz")),
    ("Skippy", "Super Chunk Peanut Butter", Some("16.3 oz")),
    ("Heinz", "Yellow Mustard", Some("14 oz")),
    ("Kellogg's", "Frosted Flakes", Some("13.5 oz")),
    ("Quaker", "Old Fashioned Oats", Some("42 oz")),
    ("Prego", "Traditional Italian Sauce", Some("24 oz")),
    ("Rao's", "Marinara Sauce", Some("24 oz")),
    ("Jif", "Creamy Peanut Butter", Some("16 oz")),
    ("Smucker's", "Concord Grape Jelly", Some("32 oz")),
    ("Hellmann's", "Real Mayonnaise", Some("30 fl oz")),
    ("Kraft", "Macaroni & Cheese Dinner", Some("7.25 oz")),
    ("Bush's", "Original Baked Beans", Some("28 oz")),
    ("Uncle Ben's", "Original Long Grain Rice", Some("32 oz")),
];

const SNACKS: [(&str, &str, Option<&str>); 15] = [
    ("Ritz", "Whole Wheat Crackers", Some("8.8 oz")),
    ("Goldfish", "Colors Cheddar Crackers", Some("6.6 oz")),
    ("Kind", "Peanut Butter Dark Chocolate", Some("1.4 oz")),
    ("Pringles", "Sour Cream & Onion", Some("5.5 oz")),
    ("Lay's", "Classic Potato Chips", Some("8 oz")),
    ("Doritos", "Nacho Cheese Tortilla Chips", Some("9.25 oz")),
    ("Cheez-It", "Original Baked Snack Crackers", Some("12.4 oz")),
    ("Oreo", "Chocolate Sandwich Cookies", Some("13.29 oz")),
    ("Chips Ahoy!", "Original Chocolate Chip Cookies", Some("13 oz")),
    ("Triscuit", "Original Whole Grain Crackers", Some("8.5 oz")),
    ("Wheat Thins", "Original Snacks", Some("8.5 oz")),
    ("Clif Bar", "Chocolate Chip Energy Bar", Some("2.4 oz")),
    ("Planters", "Dry Roasted Peanuts", Some("16 oz")),
    ("Snyder's of Hanover", "Mini Pretzels", Some("16 oz")),
    ("SkinnyPop", "Original Popcorn", Some("4.4 oz")),
];

const BEVERAGES: [(&str, &str, Option<&str>); 12] = [
    ("Coca-Cola", "Zero Sugar", Some("12 fl oz")),
    ("LaCroix", "Lime Sparkling Water", Some("12 fl oz")),
    ("Spindrift", "Grapefruit Sparkling Water", Some("12 fl oz")),
    ("Simply", "Orange Juice Pulp Free", Some("52 fl oz")),
    ("Gatorade", "Thirst Quencher Lemon-Lime", Some("28 fl oz")),
    ("Starbucks", "Frappuccino Vanilla", Some("13.7 fl oz")),
    ("Pepsi", "Cola", Some("12 fl oz")),
    ("Sprite", "Lemon-Lime Soda", Some("12 fl oz")),
    ("Tropicana", "Pure Premium Orange Juice", Some("52 fl oz")),
    ("Pure Leaf", "Unsweetened Black Tea", Some("18.5 fl oz")),
    ("Red Bull", "Energy Drink", Some("8.4 fl oz")),
    ("Poland Spring", "Natural Spring Water", Some("16.9 fl oz")),
];

const SHELF_SNACKS: [&str; 5] = ["Ritz", "Goldfish", "Kind", "Nature Valley", "Pringles"];
const SHELF_PANTRY: [&str; 5] = ["Cheerios", "Barilla", "Campbell's", "Skippy", "Heinz"];

fn stripes_image(seed: u64) -> RgbImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bands: [[u8; 3]; 3] = std::array::from_fn(|_| PALETTE[rng.random_range(0..PALETTE.len())]);
    let h = REFERENCE_HEIGHT;
    let w = rng.random_range(70..110);
    RgbImage::from_fn(w, h, |_, y| bands[(y * 3 / h) as usize])
}

fn synthetic_barcode(category: usize, i: usize) -> String {
    format!("02{category}{:010}", 4000 + i * 37)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    let shelf = ShelfSpec::default();
    let mut entries: Vec<(String, CatalogEntry, Option<RgbImage>)> = Vec::new();
    let mut push = |category: &str, barcode: String, brand: &str, name: &str, qty: Option<&str>, img: Option<RgbImage>| {
        let refs = vec![format!("images/{barcode}/0.png")];
        let e = CatalogEntry::new(&barcode, brand, name, qty, refs).expect("valid fixture entry");
        entries.push((category.to_string(), e, img));
    };

    let categories: [(&str, &[(&str, &str, Option<&str>)]); 4] =
        [("Dairy & Eggs", &DAIRY), ("Pantry", &PANTRY), ("Snacks", &SNACKS), ("Beverages", &BEVERAGES)];
    for (ci, (category, extra)) in categories.iter().enumerate() {
        for p in &shelf.products {
            let on_shelf_category = if SHELF_SNACKS.contains(&p.brand.as_str()) {
                "Snacks"
            } else if SHELF_PANTRY.contains(&p.brand.as_str()) {
                "Pantry"
            } else {
                "Beverages"
            };
            if on_shelf_category == *category {
                push(category, p.barcode.clone(), &p.brand, &p.name, None, Some(reference_image(p)));
            }
        }
        for (i, &(brand, name, qty)) in extra.iter().enumerate() {
            push(category, synthetic_barcode(ci, i), brand, name, qty, None);
        }
    }
    assert_eq!(entries.len(), 80);

    std::fs::create_dir_all(root.join("images"))?;
    let catalog = Catalog::from_entries(entries.iter().map(|(_, e, _)| e.clone()).collect()).expect("distinct barcodes");
    std::fs::write(root.join("catalog.jsonl"), catalog.to_jsonl())?;

    let mut queries = String::new();
    for (category, e, img) in &entries {
        let img = img.clone().unwrap_or_else(|| stripes_image(stable_hash(&[b"fixture", e.barcode.as_bytes()])));
        let dir = root.join("images").join(&e.barcode);
        std::fs::create_dir_all(&dir)?;
        std::fs::write(dir.join("0.png"), img.encode_png())?;
        let case = CatalogCase {
            category: category.clone(),
            barcode: e.barcode.clone(),
            brand: e.brand.clone(),
            name: e.name.clone(),
            quantity: e.quantity.clone(),
        };
        queries.push_str(&serde_json::to_string(&case)?);
        queries.push('\n');
    }
    std::fs::write(root.join("queries.jsonl"), queries)?;
    println!("wrote {} entries to {}", entries.len(), root.display());
    Ok(())
}

