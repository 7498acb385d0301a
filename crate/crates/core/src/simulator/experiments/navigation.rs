use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{csv_string, metres, percent};
use crate::geometry::Point;
use crate::guidance::{HZone, ShelfCell, VZone, Zone, ZoneGrid};
use crate::reasoner::{ParsedReply, ProductRef, Reasoner, SpatialQuery};
use crate::simulator::{project_shelf, CameraPose, Intrinsics, ShelfSpec};

/// Zone by counting grid boundaries at or left of / above the point,
/// independent of the division formula used by the guidance module.
pub fn brute_force_zone(p: Point, width: f64, height: f64) -> Zone {
    let h = (1..5).filter(|k| p.x >= width * *k as f64 / 5.0).count();
    let v = (1..3).filter(|k| p.y >= height * *k as f64 / 3.0).count();
    Zone::new(HZone::ALL[h], VZone::ALL[v])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NavigationTrial {
    pub distance_m: f64,
    pub target: ShelfCell,
    /// `None` when the target was not in view.
    pub expected: Option<Zone>,
    pub answer: String,
    pub parsed: Option<ParsedReply>,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NavigationTable {
    pub model: String,
    /// `(distance, correct, total)` in run order.
    pub per_distance: Vec<(f64, usize, usize)>,
    pub trials: Vec<NavigationTrial>,
}

impl NavigationTable {
    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["Model".to_string()];
        h.extend(self.per_distance.iter().map(|(d, _, _)| format!("Accuracy {} m", metres(*d))));
        h
    }

    pub fn to_csv(&self) -> String {
        let header = self.header();
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let mut row = vec![self.model.clone()];
        row.extend(self.per_distance.iter().map(|(_, c, t)| percent(*c, *t)));
        csv_string(&header, vec![row])
    }

    pub fn summary(&self) -> String {
        let mut s = format!("Navigation ({})\n", self.model);
        for (d, c, t) in &self.per_distance {
            s.push_str(&format!("  {:>4} m  {c:>2}/{t:<2} {:>6}\n", metres(*d), percent(*c, *t)));
        }
        s
    }
}

/// Frontal frames at each distance, every shelf product queried once. The
/// full frame is only rendered when a remote model will look at it.
pub fn run_navigation_experiment(
    shelf: &Arc<ShelfSpec>,
    distances: &[f64],
    intrinsics: Intrinsics,
    camera_height_m: f64,
    reasoner: &Reasoner,
    model: &str,
) -> NavigationTable {
    let grid = ZoneGrid::new(intrinsics.width as f64, intrinsics.height as f64);
    let mut trials = Vec::new();
    let mut per_distance = Vec::new();
    for &d in distances {
        let pose = CameraPose {
            height_m: camera_height_m,
            ..CameraPose::new(d, 0.0)
        };
        let frame = project_shelf(shelf, &pose, intrinsics);
        let image = reasoner.remote.is_some().then(|| frame.render());
        let mut correct = 0;
        let mut total = 0;
        for cell in shelf.cells() {
            let product = shelf.product(cell).expect("cell on shelf");
            let bbox = frame.view(cell).and_then(|v| v.bbox);
            let expected = bbox.map(|b| brute_force_zone(b.center(), grid.width, grid.height));
            let target = ProductRef::new(product.label());
            let target = match bbox {
                Some(b) => target.with_bbox(b),
                None => target,
            };
            let query = SpatialQuery::Navigation { frame: grid, target };
            let (answer, parsed) = match reasoner.answer(&query, image.as_ref()) {
                Ok(a) => (a.text, Some(a.parsed)),
                Err(err) => (err.to_string(), None),
            };
            let ok = matches!((&parsed, expected), (Some(ParsedReply::Zone { zone }), Some(e)) if *zone == e);
            correct += ok as usize;
            total += 1;
            trials.push(NavigationTrial {
                distance_m: d,
                target: cell,
                expected,
                answer,
                parsed,
                correct: ok,
            });
        }
        per_distance.push((d, correct, total));
    }
    NavigationTable {
        model: model.to_string(),
        per_distance,
        trials,
    }
}
