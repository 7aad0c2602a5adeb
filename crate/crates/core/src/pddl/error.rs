use std::fmt;

use super::sexpr::Pos;

/// One positioned problem found while reading PDDL.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub pos: Pos,
    pub message: String,
}

impl Diagnostic {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        Self { pos, message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.pos, self.message)
    }
}

/// Every diagnostic produced for one source text.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct PddlError {
    pub file: Option<String>,
    pub diagnostics: Vec<Diagnostic>,
}

impl PddlError {
    pub fn new(diagnostics: Vec<Diagnostic>) -> Self {
        Self { file: None, diagnostics }
    }

    pub fn single(pos: Pos, message: impl Into<String>) -> Self {
        Self::new(vec![Diagnostic::new(pos, message)])
    }

    /// Attaches a file name so diagnostics print as `file:line:col: message`.
    pub fn in_file(mut self, file: impl Into<String>) -> Self {
        self.file = Some(file.into());
        self
    }

    pub fn messages(&self) -> impl Iterator<Item = &str> {
        self.diagnostics.iter().map(|d| d.message.as_str())
    }
}

impl From<Diagnostic> for PddlError {
    fn from(d: Diagnostic) -> Self {
        Self::new(vec![d])
    }
}

impl fmt::Display for PddlError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.diagnostics.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            match &self.file {
                Some(file) => write!(f, "{file}:{d}")?,
                None => write!(f, "{d}")?,
            }
        }
        Ok(())
    }
}
