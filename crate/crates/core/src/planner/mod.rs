//! Grounding, optimal search and plan validation.

mod ground;
mod oracle;
mod plan;
mod search;
mod validate;

pub use ground::{ground, GroundError, GroundedAction, GroundedTask, DEFAULT_FLUENT_COST};
pub use oracle::brute_force_plan;
pub use plan::{parse_steps, Plan, PlanFileError};
pub use search::{applicable, linearize, plan, plan_with, successor, Heuristic, PlanError, SearchOptions};
pub use validate::{validate_plan, ValidationReport, Violation};

#[cfg(test)]
mod tests;
