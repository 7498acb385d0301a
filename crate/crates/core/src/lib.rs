//! Engine for shelf-level product retrieval guidance.
//!
//! The pipeline runs in three phases: a shopping list is resolved against a
//! product catalog ([`catalog`]), the target is found on the shelf and kept
//! locked ([`matching`], [`perception`]), and the user's hand is guided to it
//! with zone phrases, sonification and correction hops ([`guidance`],
//! [`reasoner`]). [`simulator`] provides a synthetic shelf world, the
//! evaluation protocols and the interactive session engine.

pub mod catalog;
pub mod geometry;
pub mod guidance;
pub mod matching;
pub mod perception;
pub mod reasoner;
pub mod simulator;

pub use geometry::{BBox, Point};
pub use matching::RgbImage;
