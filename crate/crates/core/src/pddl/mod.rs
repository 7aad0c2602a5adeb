//! Reader, validator and printer for the PDDL subset used by the
//! `assistant` domain.

mod error;
mod model;
mod parse;
mod render;
mod sexpr;

pub use error::{Diagnostic, PddlError};
pub use model::*;
pub use parse::{parse_domain, parse_problem, parse_state_string, StateFact};
pub(crate) use parse::check_atom;
pub use render::render_problem;
pub use sexpr::Pos;

/// Source of the shipped `assistant` domain.
pub const ASSISTANT_DOMAIN: &str = include_str!("../../assets/assistant.pddl");

/// Parses the shipped `assistant` domain.
pub fn assistant_domain() -> Domain {
    parse_domain(ASSISTANT_DOMAIN).expect("shipped domain is valid")
}
