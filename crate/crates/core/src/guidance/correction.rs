use serde::{Deserialize, Serialize};

use super::{capitalize, GuidanceError, ShelfCell};

/// Largest hop total still phrased as an exact count.
pub const FINE_MAX_HOPS: u32 = 4;

/// Signed cell offset from the touched product to the target; positive is right/down.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Hops {
    pub d_col: i32,
    pub d_row: i32,
}

impl Hops {
    pub const fn new(d_col: i32, d_row: i32) -> Self {
        Self { d_col, d_row }
    }

    pub fn total(&self) -> u32 {
        self.d_col.unsigned_abs() + self.d_row.unsigned_abs()
    }
}

impl std::ops::Neg for Hops {
    type Output = Hops;
    fn neg(self) -> Hops {
        Hops::new(-self.d_col, -self.d_row)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectionMode {
    Fine,
    Coarse,
    Confirmed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectionAdvice {
    pub mode: CorrectionMode,
    pub hops: Hops,
    pub phrase: String,
}

/// Shelf dimensions in cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShelfGrid {
    pub tiers: u32,
    pub slots: u32,
}

impl ShelfGrid {
    pub fn contains(&self, c: ShelfCell) -> bool {
        c.tier < self.tiers && c.slot < self.slots
    }

    pub fn cells(&self) -> impl Iterator<Item = ShelfCell> + '_ {
        (0..self.tiers).flat_map(move |t| (0..self.slots).map(move |s| ShelfCell::new(t, s)))
    }
}

pub fn hop_vector(touched: ShelfCell, target: ShelfCell, grid: &ShelfGrid) -> Result<Hops, GuidanceError> {
    for c in [touched, target] {
        if !grid.contains(c) {
            return Err(GuidanceError::OutOfGrid { tier: c.tier, slot: c.slot });
        }
    }
    Ok(Hops::new(
        target.slot as i32 - touched.slot as i32,
        target.tier as i32 - touched.tier as i32,
    ))
}

const NUMBER_WORDS: [&str; 21] = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven", "twelve",
    "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen", "twenty",
];

pub fn number_word(n: u32) -> String {
    NUMBER_WORDS
        .get(n as usize)
        .map(|w| w.to_string())
        .unwrap_or_else(|| n.to_string())
}

pub fn parse_number_word(word: &str) -> Option<u32> {
    NUMBER_WORDS
        .iter()
        .position(|w| *w == word)
        .map(|i| i as u32)
        .or_else(|| word.parse().ok())
}

fn count_phrase(n: u32) -> String {
    let noun = if n == 1 { "product" } else { "products" };
    format!("{} {noun}", number_word(n))
}

pub const CONFIRMED_PHRASE: &str = "target product reached";

pub fn correction_phrase(hops: Hops) -> CorrectionAdvice {
    let total = hops.total();
    let (mode, phrase) = if total == 0 {
        (CorrectionMode::Confirmed, CONFIRMED_PHRASE.to_string())
    } else if total <= FINE_MAX_HOPS {
        let mut parts = Vec::with_capacity(2);
        if hops.d_col != 0 {
            let side = if hops.d_col < 0 { "left" } else { "right" };
            parts.push(format!("{} to the {side}", count_phrase(hops.d_col.unsigned_abs())));
        }
        if hops.d_row != 0 {
            let way = if hops.d_row < 0 { "up" } else { "down" };
            parts.push(format!("{} {way}", count_phrase(hops.d_row.unsigned_abs())));
        }
        (CorrectionMode::Fine, capitalize(&parts.join(", ")))
    } else {
        let word = match (hops.d_col.signum(), hops.d_row.signum()) {
            (-1, _) => "left",
            (1, _) => "right",
            (_, -1) => "up",
            _ => "down",
        };
        (CorrectionMode::Coarse, format!("far {word}"))
    };
    CorrectionAdvice { mode, hops, phrase }
}
