//! Optimal forward search.

use std::cmp::Reverse;
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap};
use std::rc::Rc;

use super::ground::{GroundedAction, GroundedTask};
use super::plan::Plan;
use crate::pddl::Atom;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Heuristic {
    /// Plain uniform-cost search.
    Blind,
    HMax,
    #[default]
    LmCut,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    pub heuristic: Heuristic,
    /// Maximum number of expanded nodes.
    pub node_cap: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { heuristic: Heuristic::LmCut, node_cap: 2_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlanError {
    #[error("no plan reaches the goal{}", unreachable_note(.unreachable))]
    Unsolvable { unreachable: Vec<Atom> },
    #[error("search gave up after expanding {expanded} nodes")]
    ResourceLimit { expanded: usize },
    #[error("no plan within cost bound {bound}")]
    CostBound { bound: i64 },
}

fn unreachable_note(atoms: &[Atom]) -> String {
    if atoms.is_empty() {
        String::new()
    } else {
        let list: Vec<String> = atoms.iter().map(ToString::to_string).collect();
        format!(" ({} can never hold)", list.join(" "))
    }
}

pub(crate) fn holds(state: &[usize], atom: usize) -> bool {
    state.binary_search(&atom).is_ok()
}

/// Whether action `a` can run in the sorted `state`.
pub fn applicable(task: &GroundedTask, state: &[usize], a: usize) -> bool {
    let act = &task.actions[a];
    act.pre_pos.iter().all(|&p| holds(state, p)) && !act.pre_neg.iter().any(|&p| holds(state, p))
}

/// The sorted state after running action `a`.
pub fn successor(task: &GroundedTask, state: &[usize], a: usize) -> Vec<usize> {
    let act = &task.actions[a];
    let mut next: Vec<usize> = state.iter().copied().filter(|s| act.del.binary_search(s).is_err()).collect();
    next.extend_from_slice(&act.add);
    next.sort_unstable();
    next.dedup();
    next
}

pub(crate) fn is_goal(task: &GroundedTask, state: &[usize]) -> bool {
    task.goal_pos.iter().all(|&g| holds(state, g)) && !task.goal_neg.iter().any(|&g| holds(state, g))
}

/// Delete relaxation with an artificial start atom (precondition of
/// actions that have none) and an artificial goal action.
struct Relaxed {
    n_atoms: usize,
    pre: Vec<Vec<usize>>,
    add: Vec<Vec<usize>>,
    cost: Vec<i64>,
    by_pre: Vec<Vec<usize>>,
}

impl Relaxed {
    fn start(&self) -> usize {
        self.n_atoms
    }

    fn goal(&self) -> usize {
        self.n_atoms + 1
    }

    fn new(task: &GroundedTask) -> Self {
        let n = task.atoms.len();
        let mut pre: Vec<Vec<usize>> = Vec::new();
        let mut add = Vec::new();
        let mut cost = Vec::new();
        for a in &task.actions {
            pre.push(if a.pre_pos.is_empty() { vec![n] } else { a.pre_pos.clone() });
            add.push(a.add.clone());
            cost.push(a.cost);
        }
        pre.push(if task.goal_pos.is_empty() { vec![n] } else { task.goal_pos.clone() });
        add.push(vec![n + 1]);
        cost.push(0);
        let mut by_pre = vec![Vec::new(); n + 2];
        for (i, p) in pre.iter().enumerate() {
            for &x in p {
                by_pre[x].push(i);
            }
        }
        Self { n_atoms: n, pre, add, cost, by_pre }
    }

    /// h^max value of every atom under `cost`, `i64::MAX` when unreachable.
    fn hmax(&self, state: &[usize], cost: &[i64]) -> Vec<i64> {
        let mut val = vec![i64::MAX; self.n_atoms + 2];
        let mut remaining: Vec<usize> = self.pre.iter().map(Vec::len).collect();
        let mut heap = BinaryHeap::new();
        for &s in state.iter().chain(std::iter::once(&self.start())) {
            val[s] = 0;
            heap.push(Reverse((0i64, s)));
        }
        while let Some(Reverse((c, atom))) = heap.pop() {
            if c > val[atom] {
                continue;
            }
            if atom == self.goal() {
                break;
            }
            for &a in &self.by_pre[atom] {
                remaining[a] -= 1;
                if remaining[a] == 0 {
                    let v = c + cost[a];
                    for &e in &self.add[a] {
                        if v < val[e] {
                            val[e] = v;
                            heap.push(Reverse((v, e)));
                        }
                    }
                }
            }
        }
        val
    }

    fn eval_hmax(&self, state: &[usize]) -> Option<i64> {
        let v = self.hmax(state, &self.cost)[self.goal()];
        (v != i64::MAX).then_some(v)
    }

    /// The landmark-cut bound: repeatedly find a cut of actions every
    /// relaxed plan must use, charge its cheapest action and discount it.
    fn eval_lmcut(&self, state: &[usize]) -> Option<i64> {
        let mut cost = self.cost.clone();
        let mut h = 0;
        let goal = self.goal();
        loop {
            let val = self.hmax(state, &cost);
            if val[goal] == i64::MAX {
                return if h == 0 { None } else { Some(h) };
            }
            if val[goal] == 0 {
                return Some(h);
            }
            let supporter: Vec<Option<usize>> = self
                .pre
                .iter()
                .map(|p| {
                    if p.iter().any(|&x| val[x] == i64::MAX) {
                        return None;
                    }
                    p.iter().copied().max_by_key(|&x| (val[x], std::cmp::Reverse(x)))
                })
                .collect();
            // atoms that reach the goal through zero-cost supporter edges
            let mut zone = vec![false; self.n_atoms + 2];
            zone[goal] = true;
            let mut stack = vec![goal];
            let mut by_add: Vec<Vec<usize>> = vec![Vec::new(); self.n_atoms + 2];
            for (a, adds) in self.add.iter().enumerate() {
                if supporter[a].is_some() {
                    for &e in adds {
                        by_add[e].push(a);
                    }
                }
            }
            while let Some(x) = stack.pop() {
                for &a in &by_add[x] {
                    if cost[a] == 0 {
                        let s = supporter[a].unwrap();
                        if !zone[s] {
                            zone[s] = true;
                            stack.push(s);
                        }
                    }
                }
            }
            // forward from the state without entering the zone
            let mut seen = vec![false; self.n_atoms + 2];
            let mut stack: Vec<usize> = state.iter().copied().chain(std::iter::once(self.start())).collect();
            for &s in &stack {
                seen[s] = true;
            }
            let mut in_cut = vec![false; self.pre.len()];
            while let Some(x) = stack.pop() {
                for &a in &self.by_pre[x] {
                    if supporter[a] != Some(x) {
                        continue;
                    }
                    if self.add[a].iter().any(|&e| zone[e]) {
                        in_cut[a] = true;
                        continue;
                    }
                    for &e in &self.add[a] {
                        if !seen[e] {
                            seen[e] = true;
                            stack.push(e);
                        }
                    }
                }
            }
            let m = (0..self.pre.len()).filter(|&a| in_cut[a]).map(|a| cost[a]).min().unwrap_or(0);
            if m == 0 {
                // only possible with zero-cost cuts, where the bound is already exact
                return Some(h);
            }
            h += m;
            for a in 0..self.pre.len() {
                if in_cut[a] {
                    cost[a] -= m;
                }
            }
        }
    }
}

/// Actions that can matter for the goal: those adding a positive goal or a
/// positive precondition of a relevant action, or deleting an atom a
/// relevant action or the goal needs false. Dropping the rest from any
/// plan leaves a valid plan that costs no more.
pub fn relevant_actions(task: &GroundedTask) -> Vec<usize> {
    let n = task.atoms.len();
    let mut need_true = vec![false; n];
    let mut need_false = vec![false; n];
    for &g in &task.goal_pos {
        need_true[g] = true;
    }
    for &g in &task.goal_neg {
        need_false[g] = true;
    }
    let mut relevant = vec![false; task.actions.len()];
    loop {
        let mut changed = false;
        for (i, a) in task.actions.iter().enumerate() {
            if relevant[i] {
                continue;
            }
            if a.add.iter().any(|&e| need_true[e]) || a.del.iter().any(|&e| need_false[e]) {
                relevant[i] = true;
                changed = true;
                for &p in &a.pre_pos {
                    need_true[p] = true;
                }
                for &p in &a.pre_neg {
                    need_false[p] = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    (0..task.actions.len()).filter(|&i| relevant[i]).collect()
}

/// Search-equivalent smaller task: irrelevant actions go, atoms no
/// precondition or goal mentions are dropped from effects, and actions
/// left with identical conditions and effects collapse into the cheapest
/// (the earliest on ties). Also returns each kept action's index in `task`.
fn simplify(task: &GroundedTask) -> (GroundedTask, Vec<usize>) {
    let relevant = relevant_actions(task);
    let mut useful = vec![false; task.atoms.len()];
    for &g in task.goal_pos.iter().chain(&task.goal_neg) {
        useful[g] = true;
    }
    for &i in &relevant {
        let a = &task.actions[i];
        for &p in a.pre_pos.iter().chain(&a.pre_neg) {
            useful[p] = true;
        }
    }
    let mut out = task.clone();
    out.actions.clear();
    let mut origin = Vec::new();
    let mut seen: HashMap<(Vec<usize>, Vec<usize>, Vec<usize>, Vec<usize>), usize> = HashMap::new();
    for i in relevant {
        let mut a = task.actions[i].clone();
        a.add.retain(|&e| useful[e]);
        a.del.retain(|&e| useful[e]);
        let key = (a.pre_pos.clone(), a.pre_neg.clone(), a.add.clone(), a.del.clone());
        match seen.entry(key) {
            Entry::Occupied(e) => {
                let j = *e.get();
                if a.cost < out.actions[j].cost {
                    out.actions[j] = a;
                    origin[j] = i;
                }
            }
            Entry::Vacant(e) => {
                e.insert(out.actions.len());
                out.actions.push(a);
                origin.push(i);
            }
        }
    }
    (out, origin)
}

struct Node {
    state: Rc<[usize]>,
    g: i64,
    parent: Option<(usize, usize)>,
}

/// Minimum-cost plan by A* (or uniform-cost search with
/// [`Heuristic::Blind`]). Among equal f-values the lower heuristic value
/// goes first, then the earlier insertion. The plan found is then put in
/// goal order by [`linearize`].
pub fn plan(task: &GroundedTask) -> Result<Plan, PlanError> {
    plan_with(task, SearchOptions::default())
}

pub fn plan_with(task: &GroundedTask, options: SearchOptions) -> Result<Plan, PlanError> {
    if task.is_trivially_unsolvable() {
        return Err(PlanError::Unsolvable { unreachable: task.unreachable_goals.clone() });
    }
    let original = task;
    let (simplified, origin) = simplify(task);
    let task = &simplified;
    let relaxed = Relaxed::new(task);
    let h = |state: &[usize]| match options.heuristic {
        Heuristic::Blind => Some(0),
        Heuristic::HMax => relaxed.eval_hmax(state),
        Heuristic::LmCut => relaxed.eval_lmcut(state),
    };

    let mut nodes: Vec<Node> = Vec::new();
    let mut best: HashMap<Rc<[usize]>, usize> = HashMap::new();
    let mut open = BinaryHeap::new();
    let mut pushed = 0usize;

    let init: Rc<[usize]> = task.init.clone().into();
    let Some(h0) = h(&init) else {
        return Err(PlanError::Unsolvable { unreachable: Vec::new() });
    };
    nodes.push(Node { state: init.clone(), g: 0, parent: None });
    best.insert(init, 0);
    open.push(Reverse((h0, h0, pushed, 0usize)));

    let mut expanded = 0usize;
    while let Some(Reverse((_, _, _, id))) = open.pop() {
        let state = nodes[id].state.clone();
        if best[&state] != id {
            continue;
        }
        if is_goal(task, &state) {
            return Ok(Plan::new(linearize(original, extract(original, &origin, &nodes, id).steps)));
        }
        expanded += 1;
        if expanded > options.node_cap {
            return Err(PlanError::ResourceLimit { expanded: options.node_cap });
        }
        let g = nodes[id].g;
        for a in 0..task.actions.len() {
            if !applicable(task, &state, a) {
                continue;
            }
            let next: Rc<[usize]> = successor(task, &state, a).into();
            let ng = g + task.actions[a].cost;
            let slot = match best.entry(next.clone()) {
                Entry::Occupied(e) => {
                    if nodes[*e.get()].g <= ng {
                        continue;
                    }
                    e.into_mut()
                }
                Entry::Vacant(e) => e.insert(usize::MAX),
            };
            let Some(hv) = h(&next) else {
                *slot = nodes.len();
                nodes.push(Node { state: next, g: ng, parent: Some((id, a)) });
                continue;
            };
            *slot = nodes.len();
            nodes.push(Node { state: next, g: ng, parent: Some((id, a)) });
            pushed += 1;
            open.push(Reverse((ng + hv, hv, pushed, nodes.len() - 1)));
        }
    }
    Err(PlanError::Unsolvable { unreachable: Vec::new() })
}

fn extract(task: &GroundedTask, origin: &[usize], nodes: &[Node], mut id: usize) -> Plan {
    let mut steps = Vec::new();
    while let Some((parent, a)) = nodes[id].parent {
        steps.push(task.actions[origin[a]].clone());
        id = parent;
    }
    steps.reverse();
    Plan::new(steps)
}

fn touches(effects: &GroundedAction, other: &[&[usize]]) -> bool {
    effects.add.iter().chain(&effects.del).any(|e| other.iter().any(|o| o.contains(e)))
}

/// Steps that can never be swapped: one changes an atom the other reads or changes.
fn interacts(x: &GroundedAction, y: &GroundedAction) -> bool {
    touches(x, &[&y.pre_pos, &y.pre_neg, &y.add, &y.del]) || touches(y, &[&x.pre_pos, &x.pre_neg])
}

/// Reorders a valid plan so that the steps serving each goal come together,
/// goals taken in the order the problem lists them. Steps that interact
/// keep their relative order, so the result is valid and costs the same.
pub fn linearize(task: &GroundedTask, steps: Vec<GroundedAction>) -> Vec<GroundedAction> {
    let n = steps.len();
    let preds: Vec<Vec<usize>> = (0..n).map(|j| (0..j).filter(|&i| interacts(&steps[i], &steps[j])).collect()).collect();
    fn emit(j: usize, preds: &[Vec<usize>], done: &mut [bool], order: &mut Vec<usize>) {
        if done[j] {
            return;
        }
        done[j] = true;
        for &i in &preds[j] {
            emit(i, preds, done, order);
        }
        order.push(j);
    }
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let achievers = task
        .goal_pos
        .iter()
        .filter_map(|g| steps.iter().rposition(|s| s.add.contains(g)))
        .chain(task.goal_neg.iter().filter_map(|g| steps.iter().rposition(|s| s.del.contains(g))));
    for j in achievers.chain(0..n) {
        emit(j, &preds, &mut done, &mut order);
    }
    let mut slots: Vec<Option<GroundedAction>> = steps.into_iter().map(Some).collect();
    order.into_iter().map(|j| slots[j].take().unwrap()).collect()
}
