//! Prompt assembly, completion backends and reply parsing.

mod backend;
mod builder;
mod json;

pub use backend::{
    fingerprint, request_of, BackendError, CompletionBackend, HttpBackend, ScriptedBackend, ENDPOINT_ENV, REQUEST_MARKER,
};
pub use builder::{build_prompt, SorSchema};
pub use json::{parse_llm_output, JsonError};

/// Sends a prompt to a backend.
pub fn complete(prompt: &str, backend: &dyn CompletionBackend) -> Result<String, BackendError> {
    backend.complete(prompt)
}
