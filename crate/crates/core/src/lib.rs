//! Natural-language office requests to executed plans.

pub mod compiler;
pub mod intent;
pub mod pddl;
pub mod planner;
pub mod prompt;
pub mod runtime;
