use serde::{Deserialize, Serialize};

use super::ShelfCell;
use crate::geometry::{BBox, Point};

/// Dwell needed for a touch to count.
pub const DWELL_MS: u64 = 3000;

/// Deterministic frame clock: frame `i` covers `[start_ms(i), start_ms(i + 1))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameClock {
    pub fps: u32,
}

impl Default for FrameClock {
    fn default() -> Self {
        Self { fps: 30 }
    }
}

impl FrameClock {
    pub fn start_ms(&self, frame: u64) -> u64 {
        frame * 1000 / self.fps as u64
    }

    pub fn end_ms(&self, frame: u64) -> u64 {
        self.start_ms(frame + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TouchEvent {
    pub product_cell: ShelfCell,
    pub started_at: u64,
    pub dwell_ms: u64,
    pub confirmed: bool,
}

#[derive(Debug, Clone)]
struct Dwell {
    cell: ShelfCell,
    started_at: u64,
    start_ms: u64,
    dwell_ms: u64,
    fired: bool,
}

/// Tracks continuous fingertip containment and fires once per dwell.
#[derive(Debug, Clone)]
pub struct TouchMonitor {
    clock: FrameClock,
    dwell_ms: u64,
    current: Option<Dwell>,
}

impl TouchMonitor {
    pub fn new(clock: FrameClock) -> Self {
        Self {
            clock,
            dwell_ms: DWELL_MS,
            current: None,
        }
    }

    pub fn clock(&self) -> FrameClock {
        self.clock
    }

    pub fn reset(&mut self) {
        self.current = None;
    }

    /// Ongoing dwell, confirmed or not.
    pub fn progress(&self) -> Option<TouchEvent> {
        self.current.as_ref().map(|d| TouchEvent {
            product_cell: d.cell,
            started_at: d.started_at,
            dwell_ms: d.dwell_ms,
            confirmed: d.dwell_ms >= self.dwell_ms,
        })
    }

    /// Feeds one frame. Returns a confirmed event the first frame the dwell
    /// threshold is crossed; later frames in the same dwell return `None`.
    pub fn update(&mut self, frame: u64, fingertip: Option<Point>, boxes: &[(ShelfCell, BBox)]) -> Option<TouchEvent> {
        let Some(cell) = fingertip.and_then(|p| containing_cell(p, boxes)) else {
            self.current = None;
            return None;
        };
        let dwell = match &mut self.current {
            Some(d) if d.cell == cell => d,
            slot => slot.insert(Dwell {
                cell,
                started_at: frame,
                start_ms: self.clock.start_ms(frame),
                dwell_ms: 0,
                fired: false,
            }),
        };
        dwell.dwell_ms = self.clock.end_ms(frame).saturating_sub(dwell.start_ms);
        if dwell.dwell_ms >= self.dwell_ms && !dwell.fired {
            dwell.fired = true;
            return Some(TouchEvent {
                product_cell: dwell.cell,
                started_at: dwell.started_at,
                dwell_ms: dwell.dwell_ms,
                confirmed: true,
            });
        }
        None
    }
}

/// Box containing `p`; overlapping boxes resolve to the nearest center.
fn containing_cell(p: Point, boxes: &[(ShelfCell, BBox)]) -> Option<ShelfCell> {
    boxes
        .iter()
        .filter(|(_, b)| b.contains(p))
        .min_by(|(ca, a), (cb, b)| {
            a.center()
                .distance(&p)
                .total_cmp(&b.center().distance(&p))
                .then(ca.cmp(cb))
        })
        .map(|(c, _)| *c)
}
