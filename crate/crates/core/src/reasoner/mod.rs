//! Spatial-language answers for navigation and correction: a geometric
//! oracle and an optional remote vision-language client.

mod parse;
mod prompts;
mod remote;

use serde::{Deserialize, Serialize};

pub use parse::{parse_reply, CoarseDirection, ParsedReply};
pub use prompts::{build_prompt, Example, Prompt, PromptSet, PromptTemplate};
pub use remote::{remote_reason, ChatClient, HttpChatClient, MockChatClient, RemoteConfig, ENV_KEY, ENV_MODEL, ENV_URL};

use crate::geometry::BBox;
use crate::guidance::{correction_phrase, hop_vector, zone_of, CorrectionAdvice, ShelfCell, ShelfGrid, ZoneGrid};
use crate::matching::RgbImage;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ReasonerError {
    #[error("target location unknown")]
    TargetUnknown,
    #[error("shelf cell unknown or outside the grid")]
    CellUnknown,
    #[error("reasoner endpoint error: {0}")]
    Endpoint(String),
    #[error("unparseable reply: {0}")]
    UnparseableReply(String),
    #[error("prompt templates: {0}")]
    Templates(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductRef {
    pub name: String,
    pub bbox: Option<BBox>,
    pub cell: Option<ShelfCell>,
}

impl ProductRef {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            bbox: None,
            cell: None,
        }
    }

    pub fn with_bbox(mut self, bbox: BBox) -> Self {
        self.bbox = Some(bbox);
        self
    }

    pub fn with_cell(mut self, cell: ShelfCell) -> Self {
        self.cell = Some(cell);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpatialQuery {
    Navigation {
        frame: ZoneGrid,
        target: ProductRef,
    },
    Correction {
        grid: ShelfGrid,
        target: ProductRef,
        touched: ProductRef,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerSource {
    Geometric,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReasonerAnswer {
    pub text: String,
    pub parsed: ParsedReply,
    pub source: AnswerSource,
}

pub fn geometric_navigate(query: &SpatialQuery) -> Result<ReasonerAnswer, ReasonerError> {
    let SpatialQuery::Navigation { frame, target } = query else {
        return Err(ReasonerError::TargetUnknown);
    };
    let bbox = target.bbox.ok_or(ReasonerError::TargetUnknown)?;
    let zone = zone_of(bbox.center(), frame).map_err(|_| ReasonerError::TargetUnknown)?;
    Ok(ReasonerAnswer {
        text: zone.to_string(),
        parsed: ParsedReply::Zone { zone },
        source: AnswerSource::Geometric,
    })
}

/// Hop advice from the touched cell to the target cell.
pub fn geometric_advice(query: &SpatialQuery) -> Result<CorrectionAdvice, ReasonerError> {
    let SpatialQuery::Correction { grid, target, touched } = query else {
        return Err(ReasonerError::CellUnknown);
    };
    let (t, c) = target.cell.zip(touched.cell).ok_or(ReasonerError::CellUnknown)?;
    let hops = hop_vector(c, t, grid).map_err(|_| ReasonerError::CellUnknown)?;
    Ok(correction_phrase(hops))
}

pub fn geometric_correct(query: &SpatialQuery) -> Result<ReasonerAnswer, ReasonerError> {
    let advice = geometric_advice(query)?;
    Ok(ReasonerAnswer {
        parsed: ParsedReply::from(&advice),
        text: advice.phrase,
        source: AnswerSource::Geometric,
    })
}

pub fn geometric_answer(query: &SpatialQuery) -> Result<ReasonerAnswer, ReasonerError> {
    match query {
        SpatialQuery::Navigation { .. } => geometric_navigate(query),
        SpatialQuery::Correction { .. } => geometric_correct(query),
    }
}

/// Answers with the remote client when one is configured and a frame is
/// available, falling back to the geometric oracle on any failure.
pub struct Reasoner {
    pub templates: PromptSet,
    pub remote: Option<Box<dyn ChatClient>>,
}

impl Default for Reasoner {
    fn default() -> Self {
        Self::geometric()
    }
}

impl Reasoner {
    pub fn geometric() -> Self {
        Self {
            templates: PromptSet::builtin(),
            remote: None,
        }
    }

    pub fn with_remote(client: Box<dyn ChatClient>) -> Self {
        Self {
            templates: PromptSet::builtin(),
            remote: Some(client),
        }
    }

    pub fn answer(&self, query: &SpatialQuery, image: Option<&RgbImage>) -> Result<ReasonerAnswer, ReasonerError> {
        if let (Some(client), Some(image)) = (&self.remote, image) {
            let prompt = build_prompt(query, &self.templates);
            match remote_reason(&prompt, image, client.as_ref()) {
                Ok(answer) => return Ok(answer),
                Err(err) => tracing::warn!(%err, "remote reasoner failed, using geometric answer"),
            }
        }
        geometric_answer(query)
    }
}
