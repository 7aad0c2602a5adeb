//! Task dictionary to PDDL problem.

use crate::intent::TaskDictionary;
use crate::pddl::{parse_problem, render_problem, Domain, Metric, NumericFact, PddlError, Problem, TOTAL_COST};

/// Name of the object standing for the assistant itself.
pub const AGENT_OBJECT: &str = "ai";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CompileError {
    #[error("duplicate object `{0}`")]
    DuplicateObject(String),
    #[error("compiled problem does not type-check: {0}")]
    Invalid(#[from] PddlError),
}

/// The most specific agent type some action parameter asks for.
fn agent_type(domain: &Domain) -> Option<&str> {
    domain
        .actions
        .iter()
        .flat_map(|a| &a.params)
        .map(|p| p.ty.as_str())
        .find(|t| domain.types.is_subtype(t, "agent"))
}

/// Builds the problem described by `task`. Entity values stay out of the
/// PDDL; they only matter at execution time.
pub fn compile_problem(task: &TaskDictionary, domain: &Domain, name: &str) -> Result<Problem, CompileError> {
    let mut objects: Vec<(String, String)> = task.entities.iter().map(|(k, r)| (k.clone(), r.ty.clone())).collect();
    if let Some(agent) = agent_type(domain) {
        if !objects.iter().any(|(_, t)| domain.types.is_subtype(t, agent)) {
            if objects.iter().any(|(n, _)| n == AGENT_OBJECT) {
                return Err(CompileError::DuplicateObject(AGENT_OBJECT.into()));
            }
            objects.insert(0, (AGENT_OBJECT.to_string(), agent.to_string()));
        }
    }

    let mut numeric = task.numeric.clone();
    let costs = domain.has_costs();
    if costs && !numeric.iter().any(|n| n.fluent == TOTAL_COST) {
        numeric.push(NumericFact { fluent: TOTAL_COST.into(), args: Vec::new(), value: 0 });
    }

    let problem = Problem {
        name: name.to_string(),
        domain_name: domain.name.clone(),
        objects,
        init: task.init.clone(),
        numeric,
        goal: task.goals.clone(),
        metric: costs.then_some(Metric::MinimizeTotalCost),
    };
    // The printed form is what the planner and the dump files see, so it
    // has to read back to the same problem.
    let reparsed = parse_problem(&render_problem(&problem), domain)?;
    debug_assert_eq!(reparsed.canonical(), problem.canonical());
    Ok(problem)
}
