use std::fmt;

use serde::{Deserialize, Serialize};

use super::GuidanceError;
use crate::geometry::Point;

/// Horizontal fifth of the frame, left to right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HZone {
    FarLeft,
    Left,
    Middle,
    Right,
    FarRight,
}

/// Vertical third of the frame, top to bottom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VZone {
    Upper,
    Center,
    Lower,
}

impl HZone {
    pub const ALL: [HZone; 5] = [HZone::FarLeft, HZone::Left, HZone::Middle, HZone::Right, HZone::FarRight];

    pub fn label(self) -> &'static str {
        match self {
            HZone::FarLeft => "far left",
            HZone::Left => "left",
            HZone::Middle => "middle",
            HZone::Right => "right",
            HZone::FarRight => "far right",
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }
}

impl VZone {
    pub const ALL: [VZone; 3] = [VZone::Upper, VZone::Center, VZone::Lower];

    pub fn label(self) -> &'static str {
        match self {
            VZone::Upper => "upper",
            VZone::Center => "center",
            VZone::Lower => "lower",
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }
}

/// One of the 15 coarse frame regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Zone {
    pub h: HZone,
    pub v: VZone,
}

impl Zone {
    pub const fn new(h: HZone, v: VZone) -> Self {
        Self { h, v }
    }

    /// All 15 zones, row by row.
    pub fn all() -> impl Iterator<Item = Zone> {
        VZone::ALL
            .into_iter()
            .flat_map(|v| HZone::ALL.into_iter().map(move |h| Zone { h, v }))
    }

    /// Spoken form with a leading capital, e.g. "Far right, lower".
    pub fn phrase(&self) -> String {
        super::capitalize(&self.to_string())
    }
}

impl fmt::Display for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}, {}", self.h.label(), self.v.label())
    }
}

/// 5×3 partition of a frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZoneGrid {
    pub width: f64,
    pub height: f64,
}

impl ZoneGrid {
    pub fn new(width: f64, height: f64) -> Self {
        Self { width, height }
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x.is_finite() && p.y.is_finite() && (0.0..=self.width).contains(&p.x) && (0.0..=self.height).contains(&p.y)
    }
}

/// Zone containing `point`; boundaries belong to the zone on their right/below.
pub fn zone_of(point: Point, grid: &ZoneGrid) -> Result<Zone, GuidanceError> {
    if !grid.contains(point) {
        return Err(GuidanceError::OutOfFrame { x: point.x, y: point.y });
    }
    let hi = ((5.0 * point.x / grid.width).floor() as usize).min(4);
    let vi = ((3.0 * point.y / grid.height).floor() as usize).min(2);
    Ok(Zone {
        h: HZone::ALL[hi],
        v: VZone::ALL[vi],
    })
}
