//! One evaluation run: fixtures, reference descriptors and the selected tables.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use super::experiments::{
    run_catalog_experiment, run_correction_experiment, run_detection_experiment, run_navigation_experiment,
    CatalogCase, CatalogTable, CorrectionTable, DetectionTable, NavigationTable, QueryVariant, ReferenceSet,
};
use super::{ScenarioConfig, SimError};
use crate::catalog::{Catalog, FixtureImageSource};
use crate::matching::SyntheticEmbedder;
use crate::reasoner::Reasoner;

/// Bundled catalog, query list and reference images under one directory.
#[derive(Debug, Clone)]
pub struct Fixtures {
    pub root: PathBuf,
    pub catalog: Catalog,
    pub queries: Vec<CatalogCase>,
}

impl Fixtures {
    pub const CATALOG_FILE: &'static str = "catalog.jsonl";
    pub const QUERIES_FILE: &'static str = "queries.jsonl";

    pub fn load(root: impl AsRef<Path>) -> Result<Self, SimError> {
        let root = root.as_ref().to_path_buf();
        let catalog = Catalog::load(root.join(Self::CATALOG_FILE))?;
        let text = std::fs::read_to_string(root.join(Self::QUERIES_FILE))?;
        let queries = CatalogCase::parse_jsonl(&text).map_err(|e| SimError::Config(format!("{}: {e}", Self::QUERIES_FILE)))?;
        Ok(Self { root, catalog, queries })
    }

    pub fn images(&self) -> FixtureImageSource {
        FixtureImageSource::new(&self.root)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    Detection,
    Navigation,
    Correction,
    Catalog,
}

impl Experiment {
    pub const ALL: [Experiment; 4] = [Self::Detection, Self::Navigation, Self::Correction, Self::Catalog];

    pub fn name(self) -> &'static str {
        match self {
            Self::Detection => "detection",
            Self::Navigation => "navigation",
            Self::Correction => "correction",
            Self::Catalog => "catalog",
        }
    }
}

impl FromStr for Experiment {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| SimError::Config(format!("unknown experiment {s:?}")))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalReport {
    pub detection: Option<DetectionTable>,
    pub navigation: Option<NavigationTable>,
    pub correction: Option<CorrectionTable>,
    pub catalog_exact: Option<CatalogTable>,
    pub catalog_typo: Option<CatalogTable>,
}

impl EvalReport {
    /// `(file name, contents)` for every table produced.
    pub fn csv_files(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        if let Some(t) = &self.detection {
            out.push(("detection.csv", t.to_csv()));
        }
        if let Some(t) = &self.navigation {
            out.push(("navigation.csv", t.to_csv()));
        }
        if let Some(t) = &self.correction {
            out.push(("correction.csv", t.to_csv()));
        }
        if let Some(t) = &self.catalog_exact {
            out.push(("catalog_exact.csv", t.to_csv()));
        }
        if let Some(t) = &self.catalog_typo {
            out.push(("catalog_typo.csv", t.to_csv()));
        }
        out
    }

    pub fn write_csvs(&self, dir: &Path) -> Result<Vec<PathBuf>, SimError> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for (name, body) in self.csv_files() {
            let path = dir.join(name);
            std::fs::write(&path, body)?;
            written.push(path);
        }
        Ok(written)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        if let Some(t) = &self.detection {
            s.push_str(&t.summary());
        }
        if let Some(t) = &self.navigation {
            s.push_str(&t.summary());
        }
        if let Some(t) = &self.correction {
            s.push_str(&t.summary());
        }
        for t in [&self.catalog_exact, &self.catalog_typo].into_iter().flatten() {
            s.push_str(&t.summary());
        }
        s
    }

    /// Tables that fall short of 100%, which a noiseless run with the
    /// geometric reasoner must never produce. Typo queries are exempt.
    pub fn closure_failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(t) = &self.detection {
            for r in t.rows.iter().filter(|r| r.success != r.trials) {
                out.push(format!("detection {} m / {}°: {}/{}", r.radius_m, r.angle_deg, r.success, r.trials));
            }
        }
        if let Some(t) = &self.navigation {
            for (d, c, n) in t.per_distance.iter().filter(|(_, c, n)| c != n) {
                out.push(format!("navigation {d} m: {c}/{n}"));
            }
        }
        if let Some(t) = &self.correction {
            let bad = t.trials.iter().filter(|t| !t.correct).count();
            if bad > 0 {
                out.push(format!("correction: {bad} of {} trials wrong", t.trials.len()));
            }
        }
        if let Some(t) = &self.catalog_exact {
            if t.correct() != t.total() {
                out.push(format!("catalog exact: {}/{}", t.correct(), t.total()));
            }
        }
        out
    }
}

/// Runs `experiments` under `cfg`. Detection references come from the
/// fixture catalog when fixtures are given, otherwise from the shelf spec.
/// The catalog experiment needs fixtures.
pub fn run_evaluation(
    cfg: &ScenarioConfig,
    experiments: &[Experiment],
    fixtures: Option<&Fixtures>,
    reasoner: &Reasoner,
    model: &str,
) -> Result<EvalReport, SimError> {
    cfg.validate()?;
    let shelf = Arc::new(cfg.shelf.clone());
    let noise = cfg.noise_model();
    let intrinsics = cfg.camera.intrinsics();
    let mut report = EvalReport::default();
    for exp in experiments {
        match exp {
            Experiment::Detection => {
                let embedder = Arc::new(SyntheticEmbedder::new(cfg.seed, noise.embedding_perturbation));
                let refs = match fixtures {
                    Some(f) => ReferenceSet::from_catalog(&shelf, &f.catalog, &f.images(), embedder)?,
                    None => ReferenceSet::synthetic(&shelf, embedder)?,
                };
                report.detection = Some(run_detection_experiment(&shelf, &cfg.detection_settings(), &noise, &refs, &cfg.matching));
            }
            Experiment::Navigation => {
                report.navigation = Some(run_navigation_experiment(
                    &shelf,
                    &cfg.navigation.distances_m,
                    intrinsics,
                    cfg.camera.height_m,
                    reasoner,
                    model,
                ));
            }
            Experiment::Correction => {
                report.correction = Some(run_correction_experiment(
                    &shelf,
                    intrinsics,
                    cfg.correction.radius_m,
                    cfg.camera.height_m,
                    reasoner,
                    model,
                    cfg.seed,
                ));
            }
            Experiment::Catalog => {
                let f = fixtures.ok_or_else(|| SimError::Config("the catalog experiment needs fixtures".into()))?;
                let images = f.images();
                for variant in [QueryVariant::Exact, QueryVariant::Typo] {
                    let t = run_catalog_experiment(&f.catalog, &f.queries, &images, &cfg.catalog, variant, cfg.seed);
                    match variant {
                        QueryVariant::Exact => report.catalog_exact = Some(t),
                        QueryVariant::Typo => report.catalog_typo = Some(t),
                    }
                }
            }
        }
    }
    Ok(report)
}
