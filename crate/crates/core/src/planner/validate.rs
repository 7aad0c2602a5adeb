//! Step-by-step plan checking.

use std::fmt;

use serde::Serialize;

use super::ground::GroundedTask;
use super::plan::Plan;
use super::search::{holds, successor};
use crate::pddl::{Atom, Literal};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// The step names no action of the task. Steps are numbered from 1.
    UnknownAction { step: usize, action: String },
    Precondition { step: usize, action: String, unmet: Vec<String>, state: Vec<String> },
    Goal { unmet: Vec<String>, state: Vec<String> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownAction { step, action } => write!(f, "step {step}: {action} is not an action of this task"),
            Violation::Precondition { step, action, unmet, .. } => {
                write!(f, "step {step}: {action} is not applicable, unmet {}", unmet.join(" "))
            }
            Violation::Goal { unmet, .. } => write!(f, "goal not reached, unmet {}", unmet.join(" ")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    /// Cost recomputed from the task, over the steps that were applied.
    pub cost: i64,
    pub failure: Option<Violation>,
}

fn render(task: &GroundedTask, state: &[usize]) -> Vec<String> {
    let mut atoms: Vec<String> = state.iter().map(|&i| task.atoms[i].to_string()).collect();
    atoms.sort();
    atoms
}

fn lit(atom: &Atom, positive: bool) -> String {
    if positive {
        Literal::pos(atom.clone()).to_string()
    } else {
        Literal::neg(atom.clone()).to_string()
    }
}

/// Applies the plan from the initial state, stopping at the first step
/// whose precondition fails, then checks the goal.
pub fn validate_plan(task: &GroundedTask, plan: &Plan) -> ValidationReport {
    let mut state = task.init.clone();
    let mut cost = 0;
    for (i, step) in plan.steps.iter().enumerate() {
        let n = i + 1;
        let Some(index) = task.actions.iter().position(|a| a.name == step.name && a.args == step.args) else {
            let failure = Violation::UnknownAction { step: n, action: step.signature() };
            return ValidationReport { valid: false, cost, failure: Some(failure) };
        };
        let act = &task.actions[index];
        let mut unmet: Vec<String> =
            act.pre_pos.iter().filter(|&&p| !holds(&state, p)).map(|&p| lit(&task.atoms[p], true)).collect();
        unmet.extend(act.pre_neg.iter().filter(|&&p| holds(&state, p)).map(|&p| lit(&task.atoms[p], false)));
        if !unmet.is_empty() {
            let failure =
                Violation::Precondition { step: n, action: act.signature(), unmet, state: render(task, &state) };
            return ValidationReport { valid: false, cost, failure: Some(failure) };
        }
        state = successor(task, &state, index);
        cost += act.cost;
    }
    let mut unmet: Vec<String> = task.unreachable_goals.iter().map(|a| lit(a, true)).collect();
    unmet.extend(task.goal_pos.iter().filter(|&&g| !holds(&state, g)).map(|&g| lit(&task.atoms[g], true)));
    unmet.extend(task.goal_neg.iter().filter(|&&g| holds(&state, g)).map(|&g| lit(&task.atoms[g], false)));
    if unmet.is_empty() {
        ValidationReport { valid: true, cost, failure: None }
    } else {
        ValidationReport { valid: false, cost, failure: Some(Violation::Goal { unmet, state: render(task, &state) }) }
    }
}
