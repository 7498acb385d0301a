//! Navigation cues, dwell-based touch detection and correction hops.

mod correction;
mod sonify;
mod touch;
mod zones;

use serde::{Deserialize, Serialize};

pub use correction::{
    correction_phrase, hop_vector, number_word, parse_number_word, CorrectionAdvice, CorrectionMode, Hops,
    ShelfGrid, CONFIRMED_PHRASE, FINE_MAX_HOPS,
};
pub use sonify::{sonification_params, SonificationConfig, SonificationParams};
pub use touch::{FrameClock, TouchEvent, TouchMonitor, DWELL_MS};
pub use zones::{zone_of, HZone, VZone, Zone, ZoneGrid};

use crate::geometry::Point;
use crate::perception::HandObservation;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum GuidanceError {
    #[error("point ({x}, {y}) is outside the frame")]
    OutOfFrame { x: f64, y: f64 },
    #[error("cell (tier {tier}, slot {slot}) is outside the shelf grid")]
    OutOfGrid { tier: u32, slot: u32 },
}

/// Shelf position, tiers numbered from the top.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ShelfCell {
    pub tier: u32,
    pub slot: u32,
}

impl ShelfCell {
    pub const fn new(tier: u32, slot: u32) -> Self {
        Self { tier, slot }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuidanceStage {
    TorsoRelative,
    HandRelative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuidanceCue {
    pub stage: GuidanceStage,
    pub zone: Zone,
    pub sonification: Option<SonificationParams>,
    pub phrase: String,
}

/// No hysteresis: a single hand-absent frame drops back to torso guidance.
pub fn guidance_stage(hand: &HandObservation) -> GuidanceStage {
    match hand.fingertip {
        Some(_) => GuidanceStage::HandRelative,
        None => GuidanceStage::TorsoRelative,
    }
}

/// Cue for a target at `target_center`, with sonification once the hand is visible.
pub fn guidance_cue(
    hand: &HandObservation,
    target_center: Point,
    frame: &ZoneGrid,
    cfg: &SonificationConfig,
) -> Result<GuidanceCue, GuidanceError> {
    let zone = zone_of(target_center, frame)?;
    let stage = guidance_stage(hand);
    let sonification = match hand.fingertip {
        Some(tip) => Some(sonification_params(tip, target_center, frame, cfg)?),
        None => None,
    };
    Ok(GuidanceCue {
        stage,
        zone,
        sonification,
        phrase: zone.phrase(),
    })
}

pub(crate) fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FRAME: ZoneGrid = ZoneGrid { width: 1280.0, height: 720.0 };

    #[test]
    fn stage_follows_fingertip_without_hysteresis() {
        let seq = [Some(Point::new(10.0, 10.0)), None, Some(Point::new(11.0, 10.0))];
        let stages: Vec<_> = seq
            .iter()
            .enumerate()
            .map(|(i, f)| guidance_stage(&HandObservation { fingertip: *f, timestamp: i as u64 }))
            .collect();
        assert_eq!(
            stages,
            [GuidanceStage::HandRelative, GuidanceStage::TorsoRelative, GuidanceStage::HandRelative]
        );
    }

    #[test]
    fn sonification_only_with_hand() {
        let target = Point::new(1216.0, 648.0);
        let cfg = SonificationConfig::default();
        let torso = guidance_cue(&HandObservation { fingertip: None, timestamp: 0 }, target, &FRAME, &cfg).unwrap();
        assert_eq!(torso.stage, GuidanceStage::TorsoRelative);
        assert!(torso.sonification.is_none());
        assert_eq!(torso.phrase, "Far right, lower");

        let hand = HandObservation { fingertip: Some(Point::new(640.0, 360.0)), timestamp: 1 };
        let cue = guidance_cue(&hand, target, &FRAME, &cfg).unwrap();
        assert_eq!(cue.stage, GuidanceStage::HandRelative);
        assert!(cue.sonification.unwrap().pan > 0.0);
    }
}
