use serde::Deserialize;

use super::{ReasonerError, SpatialQuery};
use crate::guidance::{Zone, FINE_MAX_HOPS};

const BUILTIN: &str = include_str!("prompts.toml");

#[derive(Debug, Clone, Deserialize, PartialEq)]
pub struct Example {
    pub question: String,
    pub answer: String,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
pub struct PromptTemplate {
    pub system: String,
    pub instructions: String,
    #[serde(default)]
    pub examples: Vec<Example>,
}

/// Versioned navigation and correction templates.
#[derive(Debug, Clone, Deserialize, PartialEq)]
pub struct PromptSet {
    pub version: u32,
    pub navigation: PromptTemplate,
    pub correction: PromptTemplate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prompt {
    pub system: String,
    pub user: String,
}

impl PromptSet {
    pub const SUPPORTED_VERSION: u32 = 1;

    pub fn builtin() -> Self {
        Self::parse(BUILTIN).expect("bundled prompt templates parse")
    }

    pub fn parse(text: &str) -> Result<Self, ReasonerError> {
        let set: PromptSet = toml::from_str(text).map_err(|e| ReasonerError::Templates(e.to_string()))?;
        if set.version != Self::SUPPORTED_VERSION {
            return Err(ReasonerError::Templates(format!("unsupported template version {}", set.version)));
        }
        Ok(set)
    }
}

impl Default for PromptSet {
    fn default() -> Self {
        Self::builtin()
    }
}

fn render(template: &PromptTemplate, instructions: String) -> Prompt {
    let mut user = instructions;
    if !template.examples.is_empty() {
        user.push_str("\n\nExamples:");
        for ex in &template.examples {
            user.push_str(&format!("\nQ: {}\nA: {}", ex.question, ex.answer));
        }
    }
    Prompt {
        system: template.system.clone(),
        user,
    }
}

/// Deterministic template fill.
pub fn build_prompt(query: &SpatialQuery, templates: &PromptSet) -> Prompt {
    match query {
        SpatialQuery::Navigation { target, .. } => {
            let labels: Vec<String> = Zone::all().map(|z| format!("- {z}")).collect();
            let text = templates
                .navigation
                .instructions
                .replace("{target}", &target.name)
                .replace("{labels}", &labels.join("\n"));
            render(&templates.navigation, text)
        }
        SpatialQuery::Correction { target, touched, .. } => {
            let text = templates
                .correction
                .instructions
                .replace("{target}", &target.name)
                .replace("{touched}", &touched.name)
                .replace("{max_fine}", &FINE_MAX_HOPS.to_string());
            render(&templates.correction, text)
        }
    }
}
