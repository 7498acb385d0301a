use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ObjectBoxes, PerceptionError, Tracker};
use crate::geometry::BBox;
use crate::matching::stable_hash;

/// Reference tracker: snaps to the object outline that best overlaps the
/// previous estimate, then adds seeded jitter.
#[derive(Debug, Clone)]
pub struct IouTracker {
    pub min_iou: f64,
    pub jitter_px: f64,
    pub seed: u64,
    steps: u64,
}

impl IouTracker {
    pub fn new(seed: u64, jitter_px: f64) -> Self {
        Self {
            min_iou: 0.1,
            jitter_px,
            seed,
            steps: 0,
        }
    }
}

impl<F: ObjectBoxes> Tracker<F> for IouTracker {
    fn init(&mut self, _frame: &F, _bbox: BBox) {}

    fn step(&mut self, frame: &F, previous: BBox) -> Result<BBox, PerceptionError> {
        let best = frame
            .object_boxes()
            .into_iter()
            .map(|b| (previous.iou(&b), b))
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .filter(|(iou, _)| *iou >= self.min_iou)
            .map(|(_, b)| b)
            .ok_or(PerceptionError::TrackerLost)?;
        self.steps += 1;
        if self.jitter_px <= 0.0 {
            return Ok(best);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(stable_hash(&[
            b"tracker",
            &self.seed.to_le_bytes(),
            &self.steps.to_le_bytes(),
        ]));
        let j = self.jitter_px;
        Ok(best.translate(rng.random_range(-j..=j), rng.random_range(-j..=j)))
    }
}
