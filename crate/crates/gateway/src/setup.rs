//! Scenario loading and the shared services built from it.

use std::path::Path;
use std::sync::Arc;

use shelfguide_core::matching::SyntheticEmbedder;
use shelfguide_core::reasoner::{HttpChatClient, Reasoner, RemoteConfig};
use shelfguide_core::simulator::{Fixtures, ReasonerSource, ScenarioConfig, SessionServices};

use crate::GatewayError;

/// Label used for the geometric oracle in result tables.
pub const GEOMETRIC_MODEL: &str = "Geometric";

/// Reads the scenario file (defaults when `path` is `None`) and applies a
/// seed override.
pub fn load_scenario(path: Option<&Path>, seed: Option<u64>) -> Result<ScenarioConfig, GatewayError> {
    let mut cfg = match path {
        Some(p) => ScenarioConfig::load(p)?,
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// The reasoner named by the scenario and its table label. A remote
/// source needs `SHELF_REASONER_URL`.
pub fn build_reasoner(cfg: &ScenarioConfig) -> Result<(Reasoner, String), GatewayError> {
    match cfg.reasoner.source {
        ReasonerSource::Geometric => Ok((Reasoner::geometric(), GEOMETRIC_MODEL.to_string())),
        ReasonerSource::Remote => {
            let remote = RemoteConfig::from_env().ok_or_else(|| {
                GatewayError::Config(format!("reasoner source is remote but {} is not set", shelfguide_core::reasoner::ENV_URL))
            })?;
            let model = remote.model.clone();
            let client = HttpChatClient::new(remote).map_err(|e| GatewayError::Config(e.to_string()))?;
            Ok((Reasoner::with_remote(Box::new(client)), model))
        }
    }
}

pub fn load_fixtures(root: &Path) -> Result<Fixtures, GatewayError> {
    if !root.is_dir() {
        return Err(GatewayError::Config(format!("fixture directory {} not found", root.display())));
    }
    Ok(Fixtures::load(root)?)
}

pub fn session_services(cfg: &ScenarioConfig, fixtures: &Fixtures, reasoner: Reasoner) -> SessionServices {
    SessionServices {
        catalog: Arc::new(fixtures.catalog.clone()),
        images: Arc::new(fixtures.images()),
        embedder: Arc::new(SyntheticEmbedder::new(cfg.seed, cfg.noise.embedding_perturbation)),
        reasoner: Arc::new(reasoner),
    }
}
