//! Command-line workflows and the live session service built on
//! `shelfguide-core`.

pub mod lists;
pub mod server;
pub mod setup;
pub mod sim;

use shelfguide_core::catalog::CatalogError;
use shelfguide_core::simulator::{SessionError, SimError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: String, source: std::io::Error },
}

impl GatewayError {
    /// Bad input files or settings, as opposed to runtime failures.
    pub fn is_config(&self) -> bool {
        matches!(self, Self::Config(_) | Self::Sim(SimError::Config(_)))
    }
}
