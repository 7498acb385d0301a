use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{csv_string, percent};
use crate::guidance::{Hops, ShelfCell, FINE_MAX_HOPS};
use crate::matching::stable_hash;
use crate::reasoner::{CoarseDirection, ParsedReply, ProductRef, Reasoner, SpatialQuery};
use crate::simulator::{look_angles, project_shelf, CameraPose, Intrinsics, ShelfSpec};

/// Which pair of adjacent tiers is in front of the user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShelfConfiguration {
    Top,
    Bottom,
}

impl ShelfConfiguration {
    pub const ALL: [ShelfConfiguration; 2] = [ShelfConfiguration::Top, ShelfConfiguration::Bottom];

    pub fn tiers(self, shelf_tiers: u32) -> [u32; 2] {
        match self {
            ShelfConfiguration::Top => [0, 1],
            ShelfConfiguration::Bottom => [shelf_tiers - 2, shelf_tiers - 1],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ShelfConfiguration::Top => "Top",
            ShelfConfiguration::Bottom => "Bottom",
        }
    }
}

/// Walks from `touched` to `target` one cell at a time and names the result.
pub fn brute_force_expectation(touched: ShelfCell, target: ShelfCell) -> ParsedReply {
    let (mut col, mut row) = (touched.slot as i64, touched.tier as i64);
    let (mut d_col, mut d_row) = (0i32, 0i32);
    while col != target.slot as i64 {
        let s = (target.slot as i64 - col).signum();
        col += s;
        d_col += s as i32;
    }
    while row != target.tier as i64 {
        let s = (target.tier as i64 - row).signum();
        row += s;
        d_row += s as i32;
    }
    let steps = d_col.unsigned_abs() + d_row.unsigned_abs();
    if steps == 0 {
        ParsedReply::Confirmed
    } else if steps <= FINE_MAX_HOPS {
        ParsedReply::Fine { hops: Hops::new(d_col, d_row) }
    } else {
        let direction = if d_col < 0 {
            CoarseDirection::Left
        } else if d_col > 0 {
            CoarseDirection::Right
        } else if d_row < 0 {
            CoarseDirection::Up
        } else {
            CoarseDirection::Down
        };
        ParsedReply::Coarse { direction }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectionCase {
    pub config: ShelfConfiguration,
    /// Far touches (more than four hops) belong to the second phase.
    pub far: bool,
    pub target: ShelfCell,
    pub touched: ShelfCell,
}

/// First phase: every product of the two tiers is a target, with seven
/// distinct touches one to four hops away drawn per target. Second phase:
/// targets at both ends of each tier, touched at the opposite end of the
/// same tier and of the other tier.
pub fn correction_trials(shelf: &ShelfSpec, seed: u64) -> Vec<CorrectionCase> {
    let slots = shelf.slots_per_tier;
    let mut cases = Vec::new();
    for config in ShelfConfiguration::ALL {
        let tiers = config.tiers(shelf.tiers);
        let cells: Vec<ShelfCell> = tiers
            .iter()
            .flat_map(|&t| (0..slots).map(move |s| ShelfCell::new(t, s)))
            .collect();
        for &target in &cells {
            let near: Vec<ShelfCell> = cells
                .iter()
                .copied()
                .filter(|c| (1..=FINE_MAX_HOPS).contains(&manhattan(*c, target)))
                .collect();
            let key = stable_hash(&[
                b"correction",
                &seed.to_le_bytes(),
                config.label().as_bytes(),
                &target.tier.to_le_bytes(),
                &target.slot.to_le_bytes(),
            ]);
            let mut rng = ChaCha8Rng::seed_from_u64(key);
            for &touched in near.choose_multiple(&mut rng, 7) {
                cases.push(CorrectionCase { config, far: false, target, touched });
            }
        }
        for &tier in &tiers {
            let other = if tier == tiers[0] { tiers[1] } else { tiers[0] };
            for slot in [0, slots - 1] {
                let target = ShelfCell::new(tier, slot);
                for touch_tier in [tier, other] {
                    let touched = ShelfCell::new(touch_tier, slots - 1 - slot);
                    cases.push(CorrectionCase { config, far: true, target, touched });
                }
            }
        }
    }
    cases
}

fn manhattan(a: ShelfCell, b: ShelfCell) -> u32 {
    a.tier.abs_diff(b.tier) + a.slot.abs_diff(b.slot)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionTrial {
    #[serde(flatten)]
    pub case: CorrectionCase,
    pub expected: ParsedReply,
    pub answer: String,
    pub parsed: Option<ParsedReply>,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionTable {
    pub model: String,
    pub trials: Vec<CorrectionTrial>,
}

impl CorrectionTable {
    pub const HEADER: [&'static str; 5] =
        ["Model", "Top (<4 hops)", "Top (>4 hops)", "Bottom (<4 hops)", "Bottom (>4 hops)"];

    /// `(correct, total)` for one configuration and phase.
    pub fn cell(&self, config: ShelfConfiguration, far: bool) -> (usize, usize) {
        let sel = self.trials.iter().filter(|t| t.case.config == config && t.case.far == far);
        let (mut c, mut n) = (0, 0);
        for t in sel {
            c += t.correct as usize;
            n += 1;
        }
        (c, n)
    }

    pub fn to_csv(&self) -> String {
        let mut row = vec![self.model.clone()];
        for config in ShelfConfiguration::ALL {
            for far in [false, true] {
                let (c, n) = self.cell(config, far);
                row.push(percent(c, n));
            }
        }
        csv_string(&Self::HEADER, vec![row])
    }

    pub fn summary(&self) -> String {
        let mut s = format!("Correction ({})\n", self.model);
        for config in ShelfConfiguration::ALL {
            for far in [false, true] {
                let (c, n) = self.cell(config, far);
                let label = if far { ">4 hops" } else { "<=4 hops" };
                s.push_str(&format!("  {:<6} {label:<8} {c:>3}/{n:<3} {:>6}\n", config.label(), percent(c, n)));
            }
        }
        s
    }
}

/// Frontal pose at `radius_m`, tilted toward the middle of the two tiers.
pub fn configuration_pose(shelf: &ShelfSpec, config: ShelfConfiguration, radius_m: f64, height_m: f64) -> CameraPose {
    let [a, b] = config.tiers(shelf.tiers);
    let ya = shelf.face(ShelfCell::new(a, 0)).expect("tier exists").center().1;
    let yb = shelf.face(ShelfCell::new(b, 0)).expect("tier exists").center().1;
    let base = CameraPose {
        height_m,
        ..CameraPose::new(radius_m, 0.0)
    };
    let (_, pitch) = look_angles(base.position(), [0.0, (ya + yb) / 2.0, 0.0]);
    CameraPose {
        pan_deg: Some(0.0),
        tilt_deg: Some(pitch),
        ..base
    }
}

pub fn run_correction_experiment(
    shelf: &Arc<ShelfSpec>,
    intrinsics: Intrinsics,
    radius_m: f64,
    camera_height_m: f64,
    reasoner: &Reasoner,
    model: &str,
    seed: u64,
) -> CorrectionTable {
    let grid = shelf.grid();
    let frames: Vec<_> = ShelfConfiguration::ALL
        .iter()
        .map(|&c| {
            let needed = reasoner.remote.is_some();
            needed.then(|| project_shelf(shelf, &configuration_pose(shelf, c, radius_m, camera_height_m), intrinsics).render())
        })
        .collect();
    let trials = correction_trials(shelf, seed)
        .into_iter()
        .map(|case| {
            let name = |c| shelf.product(c).expect("cell on shelf").label();
            let query = SpatialQuery::Correction {
                grid,
                target: ProductRef::new(name(case.target)).with_cell(case.target),
                touched: ProductRef::new(name(case.touched)).with_cell(case.touched),
            };
            let image = frames[(case.config == ShelfConfiguration::Bottom) as usize].as_ref();
            let expected = brute_force_expectation(case.touched, case.target);
            let (answer, parsed) = match reasoner.answer(&query, image) {
                Ok(a) => (a.text, Some(a.parsed)),
                Err(err) => (err.to_string(), None),
            };
            CorrectionTrial {
                correct: parsed == Some(expected),
                case,
                expected,
                answer,
                parsed,
            }
        })
        .collect();
    CorrectionTable {
        model: model.to_string(),
        trials,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn trial_design_counts() {
        let shelf = ShelfSpec::default();
        let cases = correction_trials(&shelf, 7);
        assert_eq!(cases.iter().filter(|c| !c.far).count(), 168);
        assert_eq!(cases.iter().filter(|c| c.far).count(), 16);
        for c in &cases {
            let d = manhattan(c.touched, c.target);
            let tiers = c.config.tiers(3);
            assert!(tiers.contains(&c.target.tier) && tiers.contains(&c.touched.tier));
            if c.far {
                assert!(d > FINE_MAX_HOPS, "{c:?}");
            } else {
                assert!((1..=FINE_MAX_HOPS).contains(&d), "{c:?}");
            }
        }
        // touches per target are distinct
        let near: Vec<_> = cases.iter().filter(|c| !c.far).collect();
        let distinct: HashSet<_> = near.iter().map(|c| (c.config, c.target, c.touched)).collect();
        assert_eq!(distinct.len(), 168);
        assert_eq!(correction_trials(&shelf, 7), cases);
        assert_ne!(correction_trials(&shelf, 8), cases);
    }

    #[test]
    fn brute_force_examples() {
        let e = brute_force_expectation(ShelfCell::new(1, 4), ShelfCell::new(2, 2));
        assert_eq!(e, ParsedReply::Fine { hops: Hops::new(-2, 1) });
        let e = brute_force_expectation(ShelfCell::new(0, 5), ShelfCell::new(1, 0));
        assert_eq!(e, ParsedReply::Coarse { direction: CoarseDirection::Left });
        assert_eq!(brute_force_expectation(ShelfCell::new(2, 2), ShelfCell::new(2, 2)), ParsedReply::Confirmed);
    }

    #[test]
    fn geometric_model_scores_every_trial() {
        let shelf = Arc::new(ShelfSpec::default());
        let t = run_correction_experiment(&shelf, Intrinsics::default(), 0.5, 0.4, &Reasoner::geometric(), "Geometric", 7);
        assert_eq!(t.trials.len(), 184);
        assert!(t.trials.iter().all(|t| t.correct));
        assert_eq!(
            t.to_csv(),
            "Model,Top (<4 hops),Top (>4 hops),Bottom (<4 hops),Bottom (>4 hops)\nGeometric,100.0%,100.0%,100.0%,100.0%\n"
        );
    }

    #[test]
    fn configuration_frames_show_both_tiers() {
        // edge slots are cut by the frame border at 0.5 m, but stay partly in view
        let shelf = Arc::new(ShelfSpec::default());
        for config in ShelfConfiguration::ALL {
            let f = project_shelf(&shelf, &configuration_pose(&shelf, config, 0.5, 0.4), Intrinsics::default());
            for t in config.tiers(3) {
                for s in 0..6 {
                    let v = f.view(ShelfCell::new(t, s)).unwrap();
                    assert!(v.visible_fraction > 0.25, "{config:?} {t} {s}");
                    if (1..5).contains(&s) {
                        assert!(v.bbox.is_some(), "{config:?} {t} {s}");
                    }
                }
            }
        }
    }
}
