//! Plans and the plan file format.

use std::fmt;

use super::ground::{GroundedAction, GroundedTask};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Plan {
    pub steps: Vec<GroundedAction>,
    pub total_cost: i64,
}

impl Plan {
    pub fn new(steps: Vec<GroundedAction>) -> Self {
        let total_cost = steps.iter().map(|s| s.cost).sum();
        Self { steps, total_cost }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn signatures(&self) -> Vec<String> {
        self.steps.iter().map(GroundedAction::signature).collect()
    }

    /// One `(name args)` line per step and a `; cost = N` footer.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.steps {
            out.push_str(&s.signature());
            out.push('\n');
        }
        out.push_str(&format!("; cost = {}\n", self.total_cost));
        out
    }

    /// Reads a plan file, resolving every step against `task`. A cost
    /// footer, when present, must agree with the resolved steps.
    pub fn parse(text: &str, task: &GroundedTask) -> Result<Plan, PlanFileError> {
        let (steps, declared) = parse_steps(text)?;
        let mut resolved = Vec::new();
        for (line, name, args) in steps {
            let action = task
                .action(&name, &args)
                .ok_or_else(|| PlanFileError::UnknownAction { line, action: super::ground::signature(&name, &args) })?;
            resolved.push(action.clone());
        }
        let plan = Plan::new(resolved);
        if let Some(d) = declared {
            if d != plan.total_cost {
                return Err(PlanFileError::CostMismatch { declared: d, actual: plan.total_cost });
            }
        }
        Ok(plan)
    }
}

impl fmt::Display for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlanFileError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {action} is not an action of this task")]
    UnknownAction { line: usize, action: String },
    #[error("declared cost {declared} but the steps cost {actual}")]
    CostMismatch { declared: i64, actual: i64 },
}

type Steps = Vec<(usize, String, Vec<String>)>;

/// Step lines as `(line, name, args)` plus the declared cost, unresolved.
pub fn parse_steps(text: &str) -> Result<(Steps, Option<i64>), PlanFileError> {
    let mut steps = Vec::new();
    let mut declared = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() {
            continue;
        }
        if let Some(comment) = l.strip_prefix(';') {
            if let Some(v) = comment.trim().strip_prefix("cost").map(str::trim).and_then(|r| r.strip_prefix('=')) {
                let v = v.trim();
                // planners often append a unit, as in "; cost = 5 (general cost)"
                let num = v.split_whitespace().next().unwrap_or("");
                declared = Some(num.parse().map_err(|_| PlanFileError::Syntax {
                    line,
                    message: format!("bad cost `{v}`"),
                })?);
            }
            continue;
        }
        let inner = l
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| PlanFileError::Syntax { line, message: format!("expected `(action args)`, found `{l}`") })?;
        let mut words = inner.split_whitespace().map(str::to_ascii_lowercase);
        let name = words.next().ok_or_else(|| PlanFileError::Syntax { line, message: "empty step".into() })?;
        steps.push((line, name, words.collect()));
    }
    Ok((steps, declared))
}
