use serde::{Deserialize, Serialize};

use super::SimError;
use crate::guidance::{ShelfCell, ShelfGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeClass {
    Small,
    Medium,
    Large,
}

impl SizeClass {
    /// Front-face `(width, height)` in metres of the product cluster.
    pub fn face_m(self) -> (f64, f64) {
        match self {
            SizeClass::Small => (0.12, 0.15),
            SizeClass::Medium => (0.15, 0.22),
            SizeClass::Large => (0.18, 0.30),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Packaging {
    Box,
    Bottle,
    Can,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShelfProduct {
    pub barcode: String,
    pub brand: String,
    pub name: String,
    pub size: SizeClass,
    pub packaging: Packaging,
    /// Top, middle and bottom stripe colors.
    pub stripes: [[u8; 3]; 3],
}

impl ShelfProduct {
    /// "Brand name", as a shopper would say it.
    pub fn label(&self) -> String {
        format!("{} {}", self.brand, self.name)
    }
}

/// Physical shelf: tiers numbered from the top, slots from the left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShelfSpec {
    pub tiers: u32,
    pub slots_per_tier: u32,
    pub width_m: f64,
    pub tier_spacing_m: f64,
    /// Row-major, `tiers * slots_per_tier` entries.
    pub products: Vec<ShelfProduct>,
}

/// Well-separated stripe colors.
pub const PALETTE: [[u8; 3]; 13] = [
    [220, 30, 40],
    [245, 140, 20],
    [245, 220, 40],
    [140, 200, 40],
    [20, 130, 60],
    [20, 160, 160],
    [60, 160, 230],
    [30, 60, 170],
    [120, 50, 160],
    [220, 60, 160],
    [120, 70, 30],
    [245, 245, 245],
    [25, 25, 25],
];

pub const BACKGROUND: [u8; 3] = [150, 150, 150];
pub const BOARD: [u8; 3] = [95, 85, 75];

/// Palette indices per default product; any two differ in at least two bands.
const STRIPES: [[usize; 3]; 18] = [
    [0, 1, 2],
    [1, 0, 3],
    [2, 3, 0],
    [3, 2, 1],
    [4, 5, 6],
    [5, 4, 7],
    [6, 7, 4],
    [7, 6, 5],
    [8, 9, 10],
    [9, 8, 11],
    [10, 11, 8],
    [11, 10, 9],
    [0, 2, 12],
    [1, 12, 0],
    [12, 0, 1],
    [2, 1, 3],
    [3, 4, 2],
    [4, 3, 5],
];

const DEFAULT_PRODUCTS: [(&str, &str, &str, SizeClass, Packaging); 18] = [
    ("0016000275287", "Cheerios", "Original", SizeClass::Large, Packaging::Box),
    ("0044000032029", "Ritz", "Original Crackers", SizeClass::Medium, Packaging::Box),
    ("0014100085447", "Goldfish", "Cheddar Crackers", SizeClass::Medium, Packaging::Box),
    ("0602652171123", "Kind", "Dark Chocolate Nuts & Sea Salt", SizeClass::Small, Packaging::Box),
    ("0016000264601", "Nature Valley", "Oats 'n Honey Crunchy Granola Bars", SizeClass::Medium, Packaging::Box),
    ("0038000845000", "Pringles", "Original", SizeClass::Medium, Packaging::Can),
    ("0076808280739", "Barilla", "Spaghetti", SizeClass::Medium, Packaging::Box),
    ("0051000012517", "Campbell's", "Condensed Tomato Soup", SizeClass::Small, Packaging::Can),
    ("0048001213487", "Skippy", "Creamy Peanut Butter", SizeClass::Medium, Packaging::Bottle),
    ("0013000006408", "Heinz", "Tomato Ketchup", SizeClass::Medium, Packaging::Bottle),
    ("0855187006030", "Stok", "Cold Brew Coffee Unsweetened", SizeClass::Large, Packaging::Bottle),
    ("0012000161155", "Starbucks", "Frappuccino Mocha", SizeClass::Small, Packaging::Bottle),
    ("0657622604427", "Honest Kids", "Appley Ever After Apple Juice", SizeClass::Small, Packaging::Box),
    ("0012993441012", "LaCroix", "Pamplemousse Sparkling Water", SizeClass::Small, Packaging::Can),
    ("0025000058011", "Simply", "Lemonade with Strawberry", SizeClass::Large, Packaging::Bottle),
    ("0052000338775", "Gatorade", "Thirst Quencher Fruit Punch", SizeClass::Medium, Packaging::Bottle),
    ("0049000028911", "Coca-Cola", "Original Taste", SizeClass::Small, Packaging::Can),
    ("0859140002014", "Spindrift", "Unsweetened Lime Sparkling Water", SizeClass::Small, Packaging::Can),
];

impl Default for ShelfSpec {
    fn default() -> Self {
        Self {
            tiers: 3,
            slots_per_tier: 6,
            width_m: 1.5,
            tier_spacing_m: 0.4,
            products: DEFAULT_PRODUCTS
                .iter()
                .zip(STRIPES)
                .map(|(&(barcode, brand, name, size, packaging), idx)| ShelfProduct {
                    barcode: barcode.into(),
                    brand: brand.into(),
                    name: name.into(),
                    size,
                    packaging,
                    stripes: idx.map(|i| PALETTE[i]),
                })
                .collect(),
        }
    }
}

/// Axis-aligned rectangle on the shelf plane, metres; `y` grows upward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceRect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl FaceRect {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        (self.x0..self.x1).contains(&x) && (self.y0..self.y1).contains(&y)
    }

    pub fn center(&self) -> (f64, f64) {
        ((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)
    }

    pub fn corners(&self) -> [(f64, f64); 4] {
        [(self.x0, self.y0), (self.x1, self.y0), (self.x1, self.y1), (self.x0, self.y1)]
    }
}

impl ShelfSpec {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.tiers == 0 || self.slots_per_tier == 0 {
            return Err(SimError::Config("shelf needs at least one tier and slot".into()));
        }
        if !(self.width_m > 0.0 && self.tier_spacing_m > 0.0) {
            return Err(SimError::Config("shelf dimensions must be positive".into()));
        }
        let cells = (self.tiers * self.slots_per_tier) as usize;
        if self.products.len() != cells {
            return Err(SimError::Config(format!("{} products for {cells} cells", self.products.len())));
        }
        let mut codes: Vec<_> = self.products.iter().map(|p| &p.barcode).collect();
        codes.sort();
        codes.dedup();
        if codes.len() != cells {
            return Err(SimError::Config("product barcodes must be distinct".into()));
        }
        let slot_w = self.width_m / self.slots_per_tier as f64;
        for p in &self.products {
            let (w, h) = p.size.face_m();
            if w > slot_w || h >= self.tier_spacing_m {
                return Err(SimError::Config(format!("{} does not fit its slot", p.barcode)));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> ShelfGrid {
        ShelfGrid {
            tiers: self.tiers,
            slots: self.slots_per_tier,
        }
    }

    pub fn cells(&self) -> impl Iterator<Item = ShelfCell> + '_ {
        (0..self.tiers).flat_map(move |t| (0..self.slots_per_tier).map(move |s| ShelfCell::new(t, s)))
    }

    pub fn product(&self, cell: ShelfCell) -> Option<&ShelfProduct> {
        if cell.tier >= self.tiers || cell.slot >= self.slots_per_tier {
            return None;
        }
        self.products.get((cell.tier * self.slots_per_tier + cell.slot) as usize)
    }

    pub fn cell_of(&self, barcode: &str) -> Option<ShelfCell> {
        let i = self.products.iter().position(|p| p.barcode == barcode)? as u32;
        Some(ShelfCell::new(i / self.slots_per_tier, i % self.slots_per_tier))
    }

    fn slot_width(&self) -> f64 {
        self.width_m / self.slots_per_tier as f64
    }

    /// Height of the board carrying `tier`.
    pub fn board_y(&self, tier: u32) -> f64 {
        (self.tiers - 1 - tier) as f64 * self.tier_spacing_m
    }

    /// Product front face, centred in its slot and standing on its board.
    pub fn face(&self, cell: ShelfCell) -> Option<FaceRect> {
        let (w, h) = self.product(cell)?.size.face_m();
        let cx = -self.width_m / 2.0 + self.slot_width() * (cell.slot as f64 + 0.5);
        let y0 = self.board_y(cell.tier);
        Some(FaceRect {
            x0: cx - w / 2.0,
            x1: cx + w / 2.0,
            y0,
            y1: y0 + h,
        })
    }

    /// Point the camera faces by default: centre of the region covered by products.
    pub fn aim_point(&self) -> (f64, f64) {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for face in self.cells().filter_map(|c| self.face(c)) {
            lo = lo.min(face.y0);
            hi = hi.max(face.y1);
        }
        (0.0, (lo + hi) / 2.0)
    }

    /// Product cell whose face contains the shelf-plane point, if any.
    pub fn cell_at(&self, x: f64, y: f64) -> Option<ShelfCell> {
        let slot = ((x + self.width_m / 2.0) / self.slot_width()).floor();
        if slot < 0.0 || slot >= self.slots_per_tier as f64 || y < 0.0 {
            return None;
        }
        let from_bottom = (y / self.tier_spacing_m).floor();
        if from_bottom >= self.tiers as f64 {
            return None;
        }
        let cell = ShelfCell::new(self.tiers - 1 - from_bottom as u32, slot as u32);
        self.face(cell)?.contains(x, y).then_some(cell)
    }

    /// Color of the shelf plane at `(x, y)`.
    pub fn color_at(&self, x: f64, y: f64) -> [u8; 3] {
        if let Some(cell) = self.cell_at(x, y) {
            let face = self.face(cell).expect("cell has a face");
            let product = self.product(cell).expect("cell has a product");
            // stripe index counted from the top of the face
            let band = (((face.y1 - y) / (face.y1 - face.y0)) * 3.0).floor().clamp(0.0, 2.0) as usize;
            return product.stripes[band];
        }
        let on_board = (0..self.tiers).any(|t| {
            let b = self.board_y(t);
            (b - 0.02..b).contains(&y)
        });
        if on_board && x.abs() <= self.width_m / 2.0 {
            BOARD
        } else {
            BACKGROUND
        }
    }
}
