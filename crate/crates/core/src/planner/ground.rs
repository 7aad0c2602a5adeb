//! Typed instantiation of action schemas with delete-relaxed pruning.

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::pddl::{ActionSchema, Atom, CostTerm, Domain, Literal, Problem};

/// Cost charged when a cost fluent has no assignment in the problem.
pub const DEFAULT_FLUENT_COST: i64 = 1;

/// A propositional action. Atom references index [`GroundedTask::atoms`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundedAction {
    pub name: String,
    pub args: Vec<String>,
    pub pre_pos: Vec<usize>,
    pub pre_neg: Vec<usize>,
    pub add: Vec<usize>,
    pub del: Vec<usize>,
    pub cost: i64,
}

impl GroundedAction {
    /// `(name arg ...)`, the plan-file notation.
    pub fn signature(&self) -> String {
        signature(&self.name, &self.args)
    }
}

impl fmt::Display for GroundedAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.signature())
    }
}

pub(crate) fn signature(name: &str, args: &[String]) -> String {
    let mut s = format!("({name}");
    for a in args {
        s.push(' ');
        s.push_str(a);
    }
    s.push(')');
    s
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundedTask {
    /// Atom universe: every atom that can become true, in discovery order.
    pub atoms: Vec<Atom>,
    /// Initial atoms, sorted.
    pub init: Vec<usize>,
    pub goal_pos: Vec<usize>,
    pub goal_neg: Vec<usize>,
    pub actions: Vec<GroundedAction>,
    /// Positive goal atoms that not even the relaxed task reaches. When
    /// non-empty the task is unsolvable.
    pub unreachable_goals: Vec<Atom>,
    index: HashMap<Atom, usize>,
}

impl GroundedTask {
    pub fn atom_index(&self, atom: &Atom) -> Option<usize> {
        self.index.get(atom).copied()
    }

    pub fn action(&self, name: &str, args: &[String]) -> Option<&GroundedAction> {
        self.actions.iter().find(|a| a.name == name && a.args == args)
    }

    pub fn is_trivially_unsolvable(&self) -> bool {
        !self.unreachable_goals.is_empty()
    }

    /// Goal literals as atoms, for messages.
    pub fn goal_literals(&self) -> Vec<Literal> {
        let mut out: Vec<Literal> = self.goal_pos.iter().map(|&i| Literal::pos(self.atoms[i].clone())).collect();
        out.extend(self.goal_neg.iter().map(|&i| Literal::neg(self.atoms[i].clone())));
        out.extend(self.unreachable_goals.iter().cloned().map(Literal::pos));
        out
    }

    /// Copy with one action's cost replaced.
    pub fn with_cost(&self, action: usize, cost: i64) -> GroundedTask {
        let mut t = self.clone();
        t.actions[action].cost = cost;
        t
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroundError {
    #[error("action {action} would have negative cost {cost}")]
    NegativeCost { action: String, cost: i64 },
}

fn substitute(atom: &Atom, binding: &HashMap<&str, &str>) -> Atom {
    Atom {
        predicate: atom.predicate.clone(),
        args: atom.args.iter().map(|a| binding.get(a.as_str()).map_or_else(|| a.clone(), |v| v.to_string())).collect(),
    }
}

struct Schema<'a> {
    schema: &'a ActionSchema,
    /// Candidate objects per parameter.
    domains: Vec<Vec<&'a str>>,
    /// For each parameter position, the positive preconditions that become
    /// fully bound once that parameter is fixed.
    checks: Vec<Vec<&'a Atom>>,
    /// Static negative preconditions, checked against init once bound.
    neg_checks: Vec<Vec<&'a Atom>>,
}

/// Instantiates every schema over type-compatible objects, keeping only
/// actions whose positive preconditions are reachable in the delete
/// relaxation.
pub fn ground(domain: &Domain, problem: &Problem) -> Result<GroundedTask, GroundError> {
    let mut objects: Vec<(&str, &str)> = problem.objects.iter().map(|(n, t)| (n.as_str(), t.as_str())).collect();
    objects.extend(domain.constants.iter().map(|(n, t)| (n.as_str(), t.as_str())));

    let fluent: HashSet<&str> = domain.actions.iter().flat_map(|a| a.add.iter().chain(&a.delete)).map(|a| a.predicate.as_str()).collect();
    let init_set: HashSet<Atom> = problem.init.iter().cloned().collect();

    let schemas: Vec<Schema> = domain
        .actions
        .iter()
        .map(|a| {
            let domains = a
                .params
                .iter()
                .map(|p| objects.iter().filter(|(_, t)| domain.types.is_subtype(t, &p.ty)).map(|(n, _)| *n).collect())
                .collect();
            let pos_of = |v: &str| a.params.iter().position(|p| p.name == v);
            let last_bound = |atom: &Atom| atom.args.iter().filter_map(|x| pos_of(x)).max().unwrap_or(0);
            let mut checks = vec![Vec::new(); a.params.len().max(1)];
            let mut neg_checks = vec![Vec::new(); a.params.len().max(1)];
            for lit in &a.precondition {
                if lit.positive {
                    checks[last_bound(&lit.atom)].push(&lit.atom);
                } else if !fluent.contains(lit.atom.predicate.as_str()) {
                    neg_checks[last_bound(&lit.atom)].push(&lit.atom);
                }
            }
            Schema { schema: a, domains, checks, neg_checks }
        })
        .collect();

    // Relaxed fixpoint over reachable atoms.
    let mut reached: HashSet<Atom> = init_set.clone();
    loop {
        let mut fresh = Vec::new();
        for s in &schemas {
            enumerate(s, &reached, &init_set, &mut |binding| {
                for a in &s.schema.add {
                    let g = substitute(a, binding);
                    if !reached.contains(&g) {
                        fresh.push(g);
                    }
                }
            });
        }
        if fresh.is_empty() {
            break;
        }
        reached.extend(fresh);
    }

    let mut task = GroundedTask::default();
    let intern = |task: &mut GroundedTask, atom: Atom| -> usize {
        if let Some(&i) = task.index.get(&atom) {
            return i;
        }
        task.atoms.push(atom.clone());
        task.index.insert(atom, task.atoms.len() - 1);
        task.atoms.len() - 1
    };
    for a in &problem.init {
        intern(&mut task, a.clone());
    }

    let mut instances = Vec::new();
    for s in &schemas {
        enumerate(s, &reached, &init_set, &mut |binding| {
            let args: Vec<String> = s.schema.params.iter().map(|p| binding[p.name.as_str()].to_string()).collect();
            instances.push((s.schema, args));
        });
    }
    for (schema, args) in instances {
        let binding: HashMap<&str, &str> =
            schema.params.iter().zip(&args).map(|(p, a)| (p.name.as_str(), a.as_str())).collect();
        let mut action = GroundedAction {
            name: schema.name.clone(),
            args: args.clone(),
            pre_pos: Vec::new(),
            pre_neg: Vec::new(),
            add: Vec::new(),
            del: Vec::new(),
            cost: 0,
        };
        for lit in &schema.precondition {
            let g = substitute(&lit.atom, &binding);
            if lit.positive {
                action.pre_pos.push(intern(&mut task, g));
            } else if reached.contains(&g) {
                action.pre_neg.push(intern(&mut task, g));
            }
        }
        for a in &schema.add {
            action.add.push(intern(&mut task, substitute(a, &binding)));
        }
        for a in &schema.delete {
            let g = substitute(a, &binding);
            if reached.contains(&g) {
                action.del.push(intern(&mut task, g));
            }
        }
        for v in [&mut action.pre_pos, &mut action.pre_neg, &mut action.add, &mut action.del] {
            v.sort_unstable();
            v.dedup();
        }
        action.cost = match &schema.cost {
            CostTerm::Constant(c) => *c,
            CostTerm::Fluent { name, args } => {
                let ground_args: Vec<String> = args.iter().map(|a| binding[a.as_str()].to_string()).collect();
                problem.numeric_value(name, &ground_args).unwrap_or(DEFAULT_FLUENT_COST)
            }
        };
        if action.cost < 0 {
            return Err(GroundError::NegativeCost { action: action.signature(), cost: action.cost });
        }
        task.actions.push(action);
    }

    task.init = problem.init.iter().map(|a| task.index[a]).collect();
    task.init.sort_unstable();
    task.init.dedup();
    for lit in &problem.goal {
        match (lit.positive, task.index.get(&lit.atom)) {
            (true, Some(&i)) => task.goal_pos.push(i),
            (true, None) => task.unreachable_goals.push(lit.atom.clone()),
            (false, Some(&i)) => task.goal_neg.push(i),
            // never true, so its negation always holds
            (false, None) => {}
        }
    }
    let mut seen = std::collections::HashSet::new();
    task.goal_pos.retain(|g| seen.insert(*g));
    task.goal_neg.sort_unstable();
    task.goal_neg.dedup();
    Ok(task)
}

/// Calls `emit` for every binding whose positive preconditions lie in
/// `reached` and whose static negative preconditions are false initially.
fn enumerate<'a>(
    s: &Schema<'a>,
    reached: &HashSet<Atom>,
    init: &HashSet<Atom>,
    emit: &mut dyn FnMut(&HashMap<&'a str, &'a str>),
) {
    let mut binding: HashMap<&str, &str> = HashMap::new();
    let n = s.schema.params.len();
    if n == 0 {
        let ok = s.checks[0].iter().all(|a| reached.contains(*a)) && s.neg_checks[0].iter().all(|a| !init.contains(*a));
        if ok {
            emit(&binding);
        }
        return;
    }
    fn rec<'a>(
        s: &Schema<'a>,
        i: usize,
        binding: &mut HashMap<&'a str, &'a str>,
        reached: &HashSet<Atom>,
        init: &HashSet<Atom>,
        emit: &mut dyn FnMut(&HashMap<&'a str, &'a str>),
    ) {
        if i == s.schema.params.len() {
            emit(binding);
            return;
        }
        let var = s.schema.params[i].name.as_str();
        for &obj in &s.domains[i] {
            binding.insert(var, obj);
            let ok = s.checks[i].iter().all(|a| reached.contains(&substitute(a, binding)))
                && s.neg_checks[i].iter().all(|a| !init.contains(&substitute(a, binding)));
            if ok {
                rec(s, i + 1, binding, reached, init, emit);
            }
        }
        binding.remove(var);
    }
    rec(s, 0, &mut binding, reached, init, emit);
}
