//! Exhaustive reference planner for tests. It shares no search code with
//! [`super::plan`].

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::ground::GroundedTask;
use super::plan::Plan;
use super::search::PlanError;

type State = BTreeSet<usize>;

/// Enumerates states in order of cost up to `max_cost`.
///
/// Only goal-relevant actions are enumerated, and states keep only atoms
/// those actions or the goal test (see [`relevant`]). Returns
/// [`PlanError::CostBound`] when some branch was cut by the bound and
/// [`PlanError::Unsolvable`] when no branch was.
pub fn brute_force_plan(task: &GroundedTask, max_cost: i64) -> Result<Plan, PlanError> {
    if !task.unreachable_goals.is_empty() {
        return Err(PlanError::Unsolvable { unreachable: task.unreachable_goals.clone() });
    }
    let goal_met = |s: &State| task.goal_pos.iter().all(|g| s.contains(g)) && task.goal_neg.iter().all(|g| !s.contains(g));

    let (actions, observed) = relevant(task);
    let start: State = task.init.iter().copied().filter(|x| observed.contains(x)).collect();
    let mut cost: HashMap<State, i64> = HashMap::from([(start.clone(), 0)]);
    let mut parent: HashMap<State, (State, usize)> = HashMap::new();
    let mut frontier: BTreeMap<(i64, u64), State> = BTreeMap::from([((0, 0), start)]);
    let mut seq = 0u64;
    let mut cut = false;

    while let Some(((g, _), state)) = frontier.pop_first() {
        if cost[&state] < g {
            continue;
        }
        if goal_met(&state) {
            let mut steps = Vec::new();
            let mut cur = state;
            while let Some((prev, a)) = parent.get(&cur) {
                steps.push(task.actions[*a].clone());
                cur = prev.clone();
            }
            steps.reverse();
            return Ok(Plan::new(steps));
        }
        for &i in &actions {
            let act = &task.actions[i];
            if !act.pre_pos.iter().all(|p| state.contains(p)) || act.pre_neg.iter().any(|p| state.contains(p)) {
                continue;
            }
            let ng = g + act.cost;
            if ng > max_cost {
                cut = true;
                continue;
            }
            let mut next = state.clone();
            for d in &act.del {
                next.remove(d);
            }
            next.extend(act.add.iter().copied().filter(|x| observed.contains(x)));
            if cost.get(&next).is_some_and(|&c| c <= ng) {
                continue;
            }
            cost.insert(next.clone(), ng);
            parent.insert(next.clone(), (state.clone(), i));
            seq += 1;
            frontier.insert((ng, seq), next);
        }
    }
    if cut {
        Err(PlanError::CostBound { bound: max_cost })
    } else {
        Err(PlanError::Unsolvable { unreachable: Vec::new() })
    }
}

/// Backward closure from the goal. An atom is wanted true if the goal or
/// a kept action needs it, wanted false likewise for negative conditions;
/// an action is kept once it adds a wanted-true atom or deletes a
/// wanted-false one. Any plan stays valid, and no dearer, with the other
/// actions removed. Returns the kept actions and every atom they or the
/// goal test.
fn relevant(task: &GroundedTask) -> (Vec<usize>, BTreeSet<usize>) {
    let mut want_true: BTreeSet<usize> = task.goal_pos.iter().copied().collect();
    let mut want_false: BTreeSet<usize> = task.goal_neg.iter().copied().collect();
    let mut kept: BTreeSet<usize> = BTreeSet::new();
    let mut grew = true;
    while grew {
        grew = false;
        for (i, a) in task.actions.iter().enumerate() {
            if kept.contains(&i) {
                continue;
            }
            if a.add.iter().any(|x| want_true.contains(x)) || a.del.iter().any(|x| want_false.contains(x)) {
                kept.insert(i);
                want_true.extend(a.pre_pos.iter().copied());
                want_false.extend(a.pre_neg.iter().copied());
                grew = true;
            }
        }
    }
    let observed = want_true.union(&want_false).copied().collect();
    (kept.into_iter().collect(), observed)
}
