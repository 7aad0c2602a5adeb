//! Plan execution with per-step monitoring and replanning.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use serde::Serialize;
use serde_json::Value;

use super::executors::{Env, Registry};
use super::state::ExecutionState;
use super::world::OfficeWorld;
use crate::pddl::{parse_problem, parse_state_string, render_problem, Atom, Domain, Literal, Problem, StateFact};
use crate::planner::{ground, plan_with, GroundError, GroundedAction, GroundedTask, Plan, SearchOptions};

pub const DEFAULT_REPLAN_BUDGET: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReplanPolicy {
    /// Replans allowed per run.
    pub budget: usize,
    pub search: SearchOptions,
}

impl Default for ReplanPolicy {
    fn default() -> Self {
        Self { budget: DEFAULT_REPLAN_BUDGET, search: SearchOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RuntimeError {
    #[error("no executor for action `{0}`")]
    Unregistered(String),
    #[error("plan step {step} `{action}` is not an action of the problem")]
    UnknownStep { step: usize, action: String },
    #[error(transparent)]
    Ground(#[from] GroundError),
}

/// Wall-clock time of a step. Ignored by equality and serialization so
/// that reports of equal runs compare equal.
#[derive(Debug, Clone, Copy, Default)]
pub struct Elapsed(pub Duration);

impl PartialEq for Elapsed {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    /// Executed steps are numbered from 1 across replans.
    pub step: usize,
    pub action: String,
    /// The executor returned without error.
    pub applied: bool,
    pub monitor: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip)]
    pub duration: Elapsed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Trigger {
    Failure { step: usize, action: String, reason: String },
    NewGoals { step: usize, action: String, goals: Vec<String> },
}

impl std::fmt::Display for Trigger {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Trigger::Failure { step, action, reason } => write!(f, "step {step} {action} failed: {reason}"),
            Trigger::NewGoals { step, action, goals } => write!(f, "step {step} {action} added goals {}", goals.join(" ")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplanRecord {
    pub trigger: Trigger,
    /// The problem handed to the planner, when one could be built.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub problem: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Success,
    /// Every step ran but the tracked state misses a goal.
    Failed,
    /// A failure could not be repaired by replanning.
    Aborted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExecutionReport {
    pub status: Status,
    pub steps: Vec<StepRecord>,
    pub replans: Vec<ReplanRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    /// Goal literals in force at the end, injected ones included.
    pub goals: Vec<String>,
    /// The tracked symbolic state at the end, sorted.
    pub final_state: Vec<String>,
    /// World paths created or changed by the run.
    pub artifacts: Vec<String>,
    /// Outbox entries added by the run.
    pub delivered: Vec<Value>,
}

/// Called before each step with its 1-based number.
pub type StepHook<'h> = Box<dyn FnMut(usize, &GroundedAction, &mut OfficeWorld) + 'h>;
/// Called before each replanning attempt.
pub type ReplanHook<'h> = Box<dyn FnMut(&Trigger, &mut OfficeWorld) + 'h>;

#[derive(Default)]
pub struct Hooks<'h> {
    pub before_step: Option<StepHook<'h>>,
    pub before_replan: Option<ReplanHook<'h>>,
}

/// What a run needs besides the state and the world.
pub struct Session<'a> {
    pub domain: &'a Domain,
    pub registry: &'a Registry,
    pub env: Env,
    pub policy: ReplanPolicy,
}

impl<'a> Session<'a> {
    pub fn new(domain: &'a Domain, registry: &'a Registry) -> Self {
        Self { domain, registry, env: Env::default(), policy: ReplanPolicy::default() }
    }
}

/// Input to [`replan`].
pub struct ReplanRequest<'a> {
    pub domain: &'a Domain,
    /// Objects, numeric facts and metric are taken from here.
    pub template: &'a Problem,
    pub tracked: &'a BTreeSet<Atom>,
    pub goals: &'a [Literal],
    /// Grounded actions the planner must not use.
    pub blocked: &'a dyn Fn(&GroundedAction) -> bool,
    pub search: SearchOptions,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("aborted: {reason}")]
pub struct Aborted {
    pub reason: String,
    /// The rendered problem, when one was built.
    pub problem: Option<String>,
}

/// A fresh problem from the tracked state and the goals in force, cut down
/// to the unblocked actions and solved. Each call spends one unit of budget;
/// with none left nothing is attempted.
pub fn replan(req: &ReplanRequest<'_>, budget: &mut usize) -> Result<(Problem, GroundedTask, Plan), Aborted> {
    if *budget == 0 {
        return Err(Aborted { reason: "replanning budget exhausted".into(), problem: None });
    }
    *budget -= 1;
    let mut problem = req.template.clone();
    problem.init = req.tracked.iter().cloned().collect();
    problem.goal = req.goals.to_vec();
    let text = render_problem(&problem);
    let problem = parse_problem(&text, req.domain)
        .map_err(|e| Aborted { reason: format!("replanning problem is invalid: {e}"), problem: Some(text.clone()) })?;
    let mut task = ground(req.domain, &problem).map_err(|e| Aborted { reason: e.to_string(), problem: Some(text.clone()) })?;
    task.actions.retain(|a| !(req.blocked)(a));
    let plan = plan_with(&task, req.search).map_err(|e| Aborted { reason: e.to_string(), problem: Some(text) })?;
    Ok((problem, task, plan))
}

fn parse_goals(goals: &[String]) -> Result<Vec<Literal>, String> {
    let mut out = Vec::new();
    for g in goals {
        for fact in parse_state_string(g).map_err(|e| format!("injected goal {g:?}: {e}"))? {
            match fact {
                StateFact::Literal(l) => out.push(l),
                StateFact::Numeric { .. } => return Err(format!("injected goal {g:?} is numeric")),
            }
        }
    }
    Ok(out)
}

fn goals_hold(tracked: &BTreeSet<Atom>, goals: &[Literal]) -> bool {
    goals.iter().all(|l| tracked.contains(&l.atom) == l.positive)
}

fn index_of(task: &GroundedTask, step: usize, a: &GroundedAction) -> Result<usize, RuntimeError> {
    task.actions
        .iter()
        .position(|x| x.name == a.name && x.args == a.args)
        .ok_or_else(|| RuntimeError::UnknownStep { step, action: a.signature() })
}

pub fn execute_plan(
    session: &Session<'_>,
    problem: &Problem,
    plan: &Plan,
    state: &mut ExecutionState,
    world: &mut OfficeWorld,
) -> Result<ExecutionReport, RuntimeError> {
    execute_plan_with(session, problem, plan, state, world, &mut Hooks::default())
}

/// Runs the plan step by step. After each step the executor's monitor
/// decides success; only then is the symbolic state advanced by the
/// action's effects. A failed monitor, an executor error or injected goals
/// trigger replanning from the tracked state. Failed actions stay out of
/// later plans unless their executor reports them ready again.
pub fn execute_plan_with(
    session: &Session<'_>,
    problem: &Problem,
    plan: &Plan,
    state: &mut ExecutionState,
    world: &mut OfficeWorld,
    hooks: &mut Hooks<'_>,
) -> Result<ExecutionReport, RuntimeError> {
    let mut task = ground(session.domain, problem)?;
    for (i, step) in plan.steps.iter().enumerate() {
        if session.registry.get(&step.name).is_none() {
            return Err(RuntimeError::Unregistered(step.name.clone()));
        }
        index_of(&task, i + 1, step)?;
    }
    let before_artifacts = world.artifact_paths();
    let outbox_start = world.outbox.len();

    let mut tracked: BTreeSet<Atom> = problem.init.iter().cloned().collect();
    let mut goals: Vec<Literal> = problem.goal.clone();
    let mut queue: std::collections::VecDeque<GroundedAction> = plan.steps.iter().cloned().collect();
    let mut failed: BTreeSet<String> = BTreeSet::new();
    let mut budget = session.policy.budget;
    let mut steps = Vec::new();
    let mut replans = Vec::new();
    let mut aborted: Option<String> = None;

    while let Some(action) = queue.pop_front() {
        let n = steps.len() + 1;
        if let Some(h) = hooks.before_step.as_mut() {
            h(n, &action, world);
        }
        let executor = session.registry.get(&action.name).ok_or_else(|| RuntimeError::Unregistered(action.name.clone()))?;
        let index = index_of(&task, n, &action)?;
        let snapshot = (state.clone(), world.snapshot());
        let started = Instant::now();
        let result = executor.apply(&action.args, state, world, &session.env);
        let (applied, error) = match &result {
            Ok(()) => (true, None),
            Err(e) => {
                state.clone_from(&snapshot.0);
                world.restore(snapshot.1);
                (false, Some(e.to_string()))
            }
        };
        let monitor = applied && executor.succeeded(&action.args, state, world);
        steps.push(StepRecord {
            step: n,
            action: action.signature(),
            applied,
            monitor,
            error: error.clone(),
            duration: Elapsed(started.elapsed()),
        });

        let trigger = if monitor {
            let act = &task.actions[index];
            for d in &act.del {
                tracked.remove(&task.atoms[*d]);
            }
            for a in &act.add {
                tracked.insert(task.atoms[*a].clone());
            }
            if state.new_goals.is_empty() {
                None
            } else {
                Some(Trigger::NewGoals { step: n, action: action.signature(), goals: state.new_goals.clone() })
            }
        } else {
            failed.insert(action.signature());
            let reason = error.unwrap_or_else(|| "monitor reported failure".into());
            Some(Trigger::Failure { step: n, action: action.signature(), reason })
        };
        let Some(trigger) = trigger else { continue };

        let injected = std::mem::take(&mut state.new_goals);
        match parse_goals(&injected) {
            Ok(extra) => {
                for g in extra {
                    if !goals.contains(&g) {
                        goals.push(g);
                    }
                }
            }
            Err(reason) => {
                replans.push(ReplanRecord { trigger, problem: None, plan: None, error: Some(reason.clone()) });
                aborted = Some(reason);
                break;
            }
        }
        if budget == 0 {
            let reason = format!("{trigger}; replanning budget exhausted");
            replans.push(ReplanRecord { trigger, problem: None, plan: None, error: Some("replanning budget exhausted".into()) });
            aborted = Some(reason);
            break;
        }
        if let Some(h) = hooks.before_replan.as_mut() {
            h(&trigger, world);
        }
        let blocked = |a: &GroundedAction| {
            failed.contains(&a.signature())
                && session.registry.get(&a.name).is_none_or(|e| !e.ready(&a.args, state, world))
        };
        let req = ReplanRequest {
            domain: session.domain,
            template: problem,
            tracked: &tracked,
            goals: &goals,
            blocked: &blocked,
            search: session.policy.search,
        };
        match replan(&req, &mut budget) {
            Ok((new_problem, new_task, new_plan)) => {
                if let Some(missing) = new_plan.steps.iter().find(|s| session.registry.get(&s.name).is_none()) {
                    return Err(RuntimeError::Unregistered(missing.name.clone()));
                }
                replans.push(ReplanRecord {
                    trigger,
                    problem: Some(render_problem(&new_problem)),
                    plan: Some(new_plan.signatures()),
                    error: None,
                });
                task = new_task;
                queue = new_plan.steps.into_iter().collect();
            }
            Err(ab) => {
                let reason = format!("{trigger}; replanning failed: {}", ab.reason);
                replans.push(ReplanRecord { trigger, problem: ab.problem, plan: None, error: Some(ab.reason) });
                aborted = Some(reason);
                break;
            }
        }
    }

    let (status, reason) = match aborted {
        Some(r) => (Status::Aborted, Some(r)),
        None if goals_hold(&tracked, &goals) => (Status::Success, None),
        None => (Status::Failed, Some("plan finished without reaching every goal".into())),
    };
    let after = world.artifact_paths();
    let artifacts = after.iter().filter(|(k, v)| before_artifacts.get(*k) != Some(v)).map(|(k, _)| k.clone()).collect();
    Ok(ExecutionReport {
        status,
        steps,
        replans,
        reason,
        goals: goals.iter().map(ToString::to_string).collect(),
        final_state: tracked.iter().map(ToString::to_string).collect(),
        artifacts,
        delivered: world.outbox[outbox_start..].to_vec(),
    })
}
