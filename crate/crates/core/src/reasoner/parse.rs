use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::ReasonerError;
use crate::guidance::{parse_number_word, CorrectionAdvice, CorrectionMode, HZone, Hops, VZone, Zone};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoarseDirection {
    Left,
    Right,
    Up,
    Down,
}

/// A reply reduced to one admissible phrase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParsedReply {
    Zone { zone: Zone },
    Fine { hops: Hops },
    Coarse { direction: CoarseDirection },
    Confirmed,
}

impl From<&CorrectionAdvice> for ParsedReply {
    fn from(advice: &CorrectionAdvice) -> Self {
        match advice.mode {
            CorrectionMode::Confirmed => ParsedReply::Confirmed,
            CorrectionMode::Fine => ParsedReply::Fine { hops: advice.hops },
            CorrectionMode::Coarse => ParsedReply::Coarse {
                direction: match (advice.hops.d_col.signum(), advice.hops.d_row.signum()) {
                    (-1, _) => CoarseDirection::Left,
                    (1, _) => CoarseDirection::Right,
                    (_, -1) => CoarseDirection::Up,
                    _ => CoarseDirection::Down,
                },
            },
        }
    }
}

const H: &str = "far left|far right|left|middle|right";
const V: &str = "upper|center|lower";
const N: &str = r"\d+|zero|one|two|three|four|five|six|seven|eight|nine|ten|eleven|twelve|thirteen|fourteen|fifteen|sixteen|seventeen|eighteen|nineteen|twenty";

static ZONE_HV: LazyLock<Regex> = LazyLock::new(|| Regex::new(&format!(r"\b({H})\s*,?\s*({V})\b")).unwrap());
static ZONE_VH: LazyLock<Regex> = LazyLock::new(|| Regex::new(&format!(r"\b({V})\s*,?\s*({H})\b")).unwrap());
static HOPS: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(
        r"\b(?:({N}) products? to the (left|right)(?:\s*,?\s*(?:and\s+)?({N}) products? (up|down))?|({N}) products? (up|down))\b"
    ))
    .unwrap()
});
static COARSE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\bfar (?:to (?:the |your )?)?(left|right|up|down)\b").unwrap());
static CONFIRMED: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\btarget product reached\b").unwrap());
static SPACES: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\s+").unwrap());

fn h_zone(s: &str) -> HZone {
    match s {
        "far left" => HZone::FarLeft,
        "left" => HZone::Left,
        "middle" => HZone::Middle,
        "right" => HZone::Right,
        _ => HZone::FarRight,
    }
}

fn v_zone(s: &str) -> VZone {
    match s {
        "upper" => VZone::Upper,
        "center" => VZone::Center,
        _ => VZone::Lower,
    }
}

fn signed(count: &str, negative: bool) -> Option<i32> {
    let n = i32::try_from(parse_number_word(count)?).ok()?;
    Some(if negative { -n } else { n })
}

/// Blanks out every match so later patterns cannot reuse its words.
fn take_all(text: &mut String, re: &Regex, mut f: impl FnMut(&regex::Captures) -> Option<ParsedReply>, out: &mut Vec<ParsedReply>) {
    let mut spans = Vec::new();
    for caps in re.captures_iter(text) {
        if let Some(p) = f(&caps) {
            out.push(p);
        }
        spans.push(caps.get(0).expect("group 0").range());
    }
    for r in spans.into_iter().rev() {
        text.replace_range(r, " | ");
    }
}

/// Reduces free text to exactly one admissible phrase.
pub fn parse_reply(text: &str) -> Result<ParsedReply, ReasonerError> {
    let lowered = text.to_lowercase().replace("centre", "center").replace('-', " ");
    let mut s = SPACES.replace_all(&lowered, " ").into_owned();
    let mut found = Vec::new();
    take_all(&mut s, &ZONE_HV, |c| Some(ParsedReply::Zone { zone: Zone::new(h_zone(&c[1]), v_zone(&c[2])) }), &mut found);
    take_all(&mut s, &ZONE_VH, |c| Some(ParsedReply::Zone { zone: Zone::new(h_zone(&c[2]), v_zone(&c[1])) }), &mut found);
    take_all(
        &mut s,
        &HOPS,
        |c| {
            let hops = if let Some(n) = c.get(1) {
                let d_col = signed(n.as_str(), &c[2] == "left")?;
                let d_row = match c.get(3) {
                    Some(m) => signed(m.as_str(), &c[4] == "up")?,
                    None => 0,
                };
                Hops::new(d_col, d_row)
            } else {
                Hops::new(0, signed(&c[5], &c[6] == "up")?)
            };
            Some(ParsedReply::Fine { hops })
        },
        &mut found,
    );
    take_all(
        &mut s,
        &COARSE,
        |c| {
            Some(ParsedReply::Coarse {
                direction: match &c[1] {
                    "left" => CoarseDirection::Left,
                    "right" => CoarseDirection::Right,
                    "up" => CoarseDirection::Up,
                    _ => CoarseDirection::Down,
                },
            })
        },
        &mut found,
    );
    take_all(&mut s, &CONFIRMED, |_| Some(ParsedReply::Confirmed), &mut found);
    found.sort_by_key(|p| format!("{p:?}"));
    found.dedup();
    match found.as_slice() {
        [one] => Ok(*one),
        [] => Err(ReasonerError::UnparseableReply(text.to_string())),
        _ => Err(ReasonerError::UnparseableReply(format!("ambiguous reply: {text}"))),
    }
}
