//! The intent catalog used for few-shot prompting.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::dictionary::{validate_task_dictionary, ValidationError};
use crate::pddl::Domain;

pub const DEFAULT_CATALOG: &str = include_str!("../../assets/intents.json");

/// Name of the catch-all intent.
pub const UNKNOWN_INTENT: &str = "Unknown Intent/Anything else/Something unrelated to the above intents";

/// Reply given when a request cannot be served.
pub const FALLBACK_RESPONSE: &str = "Apologies, I'm not able to help with that. Try another question!";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Intent {
    pub name: String,
    pub description: String,
    pub example: Value,
}

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("cannot read intent catalog {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("intent catalog is not a JSON list of intents: {0}")]
    Json(#[from] serde_json::Error),
    #[error("intent `{0}` is declared twice")]
    Duplicate(String),
    #[error("example of intent `{name}` is invalid: {source}")]
    InvalidExample { name: String, source: ValidationError },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IntentCatalog {
    intents: Vec<Intent>,
}

impl IntentCatalog {
    /// Parses a catalog and checks every example against `domain`.
    pub fn from_json(text: &str, domain: &Domain) -> Result<Self, CatalogError> {
        let intents: Vec<Intent> = serde_json::from_str(text)?;
        for (i, intent) in intents.iter().enumerate() {
            if intents[..i].iter().any(|o| o.name == intent.name) {
                return Err(CatalogError::Duplicate(intent.name.clone()));
            }
            validate_task_dictionary(&intent.example, domain)
                .map_err(|source| CatalogError::InvalidExample { name: intent.name.clone(), source })?;
        }
        Ok(Self { intents })
    }

    pub fn load(path: &Path, domain: &Domain) -> Result<Self, CatalogError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| CatalogError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text, domain)
    }

    pub fn shipped(domain: &Domain) -> Self {
        Self::from_json(DEFAULT_CATALOG, domain).expect("shipped catalog is valid")
    }

    pub fn intents(&self) -> &[Intent] {
        &self.intents
    }

    pub fn get(&self, name: &str) -> Option<&Intent> {
        self.intents.iter().find(|i| i.name == name)
    }

    pub fn len(&self) -> usize {
        self.intents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intents.is_empty()
    }
}
