//! Rule-based entity extraction.

use std::path::Path;

use indexmap::IndexMap;
use regex::Regex;
use serde::Serialize;

/// Default entity patterns.
pub const DEFAULT_PATTERNS: &str = include_str!("../../assets/patterns.json");

#[derive(Debug, thiserror::Error)]
pub enum PatternError {
    #[error("cannot read pattern file {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("pattern file is not a JSON object of strings: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid pattern for `{ty}`: {source}")]
    Regex { ty: String, source: regex::Error },
    #[error("pattern for `{0}` matches the empty string")]
    Empty(String),
}

/// Ordered entity patterns. Earlier entries win ties between equally long
/// matches at the same position.
#[derive(Debug, Clone)]
pub struct PatternSet {
    patterns: Vec<(String, Regex)>,
}

impl PatternSet {
    pub fn from_json(text: &str) -> Result<Self, PatternError> {
        let raw: IndexMap<String, String> = serde_json::from_str(text)?;
        let mut patterns = Vec::with_capacity(raw.len());
        for (ty, src) in raw {
            let re = Regex::new(&src).map_err(|source| PatternError::Regex { ty: ty.clone(), source })?;
            if re.is_match("") {
                return Err(PatternError::Empty(ty));
            }
            patterns.push((ty, re));
        }
        Ok(Self { patterns })
    }

    pub fn load(path: &Path) -> Result<Self, PatternError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| PatternError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn shipped() -> Self {
        Self::from_json(DEFAULT_PATTERNS).expect("shipped patterns are valid")
    }

    pub fn types(&self) -> impl Iterator<Item = &str> {
        self.patterns.iter().map(|(t, _)| t.as_str())
    }
}

/// One recognised entity with its byte span in the request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EntityMatch {
    pub ty: String,
    pub text: String,
    pub start: usize,
    pub end: usize,
}

/// Entities found in a request, in input order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EntityMap {
    pub matches: Vec<EntityMatch>,
}

impl EntityMap {
    pub fn is_empty(&self) -> bool {
        self.matches.is_empty()
    }

    /// Surface strings of one entity type, in input order.
    pub fn get(&self, ty: &str) -> Vec<&str> {
        self.matches.iter().filter(|m| m.ty == ty).map(|m| m.text.as_str()).collect()
    }

    /// Grouped view: type name to surface strings. Types appear in order of
    /// their first match.
    pub fn grouped(&self) -> IndexMap<String, Vec<String>> {
        let mut out: IndexMap<String, Vec<String>> = IndexMap::new();
        for m in &self.matches {
            out.entry(m.ty.clone()).or_default().push(m.text.clone());
        }
        out
    }
}

/// Scans left to right. At each position the longest match from any pattern
/// is taken and scanning resumes after it, so matches never overlap.
pub fn extract_entities(request: &str, patterns: &PatternSet) -> EntityMap {
    let mut matches = Vec::new();
    let mut pos = 0;
    while pos < request.len() {
        let mut best: Option<(usize, usize, usize)> = None;
        for (i, (_, re)) in patterns.patterns.iter().enumerate() {
            let Some(m) = re.find_at(request, pos) else { continue };
            if m.is_empty() {
                continue;
            }
            let better = match best {
                None => true,
                Some((s, e, _)) => m.start() < s || (m.start() == s && m.end() > e),
            };
            if better {
                best = Some((m.start(), m.end(), i));
            }
        }
        let Some((start, end, i)) = best else { break };
        matches.push(EntityMatch {
            ty: patterns.patterns[i].0.clone(),
            text: request[start..end].to_string(),
            start,
            end,
        });
        pos = end;
    }
    EntityMap { matches }
}
