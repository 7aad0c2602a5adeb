//! Task dictionaries: the structured reply of the completion backend.

use indexmap::IndexMap;
use serde_json::{Map, Value};

use crate::pddl::{check_atom, parse_state_string, Atom, Domain, Literal, NumericFact, StateFact};

pub const INIT_KEY: &str = "init_state";
pub const GOALS_KEY: &str = "goals";

/// One entity of a task dictionary.
#[derive(Debug, Clone, PartialEq)]
pub struct EntityRecord {
    pub ty: String,
    pub value: Value,
    /// Any other keys, such as `to`, `subject` or `body` for emails.
    pub extras: Map<String, Value>,
}

impl EntityRecord {
    pub fn new(ty: impl Into<String>, value: Value) -> Self {
        Self { ty: ty.into(), value, extras: Map::new() }
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("type".into(), Value::String(self.ty.clone()));
        m.insert("value".into(), self.value.clone());
        for (k, v) in &self.extras {
            m.insert(k.clone(), v.clone());
        }
        Value::Object(m)
    }
}

/// A validated task dictionary.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TaskDictionary {
    pub entities: IndexMap<String, EntityRecord>,
    pub init: Vec<Atom>,
    pub numeric: Vec<NumericFact>,
    pub goals: Vec<Literal>,
    /// Accepted oddities, such as a goal literal already true in the initial state.
    pub warnings: Vec<String>,
}

impl TaskDictionary {
    /// Wire form: entity keys, then `init_state` and `goals` as state records.
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        for (k, r) in &self.entities {
            m.insert(k.clone(), r.to_json());
        }
        let init: Vec<String> = self
            .init
            .iter()
            .map(|a| a.to_string())
            .chain(self.numeric.iter().map(|n| n.to_string()))
            .collect();
        let goals: Vec<String> = self.goals.iter().map(|l| l.to_string()).collect();
        m.insert(INIT_KEY.into(), state_record(init.join(" ")));
        m.insert(GOALS_KEY.into(), state_record(format!("(and {})", goals.join(" ")).replace("(and )", "(and)")));
        Value::Object(m)
    }
}

fn state_record(value: String) -> Value {
    let mut m = Map::new();
    m.insert("type".into(), Value::String("state".into()));
    m.insert("value".into(), Value::String(value));
    Value::Object(m)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid task dictionary: {}", violations.join("; "))]
pub struct ValidationError {
    pub violations: Vec<String>,
}

fn is_object_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some('a'..='z'))
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-' || c == '_')
}

/// Reads the literal string of `init_state` or `goals`. Accepts the state
/// record form `{"type": "state", "value": "..."}` or a bare string.
fn state_text<'a>(raw: &'a Value, key: &str, violations: &mut Vec<String>) -> Option<&'a str> {
    let text = match raw {
        Value::String(s) => Some(s.as_str()),
        Value::Object(m) => m.get("value").and_then(Value::as_str),
        _ => None,
    };
    if text.is_none() {
        violations.push(format!("`{key}` must be a state string"));
    }
    text
}

/// Checks a raw dictionary against a domain and collects every violation.
pub fn validate_task_dictionary(raw: &Value, domain: &Domain) -> Result<TaskDictionary, ValidationError> {
    let mut violations = Vec::new();
    let Some(obj) = raw.as_object() else {
        return Err(ValidationError { violations: vec!["task dictionary must be a JSON object".into()] });
    };

    let mut entities = IndexMap::new();
    for (key, value) in obj {
        if key == INIT_KEY || key == GOALS_KEY {
            continue;
        }
        if key.to_lowercase() != *key {
            violations.push(format!("key `{key}` not lowercase"));
            continue;
        }
        if domain.types.contains(key) {
            violations.push(format!("key `{key}` collides with a type name"));
            continue;
        }
        if !is_object_name(key) {
            violations.push(format!("key `{key}` is not a valid object name"));
            continue;
        }
        let Some(rec) = value.as_object() else {
            violations.push(format!("entity `{key}` must be a definition dictionary"));
            continue;
        };
        let ty = match rec.get("type") {
            Some(Value::String(t)) => t.clone(),
            _ => {
                violations.push(format!("entity `{key}` has no `type`"));
                continue;
            }
        };
        if !domain.types.contains(&ty) {
            violations.push(format!("entity `{key}` has unknown type `{ty}`"));
            continue;
        }
        let Some(value) = rec.get("value") else {
            violations.push(format!("entity `{key}` has no `value`"));
            continue;
        };
        let extras = rec.iter().filter(|(k, _)| *k != "type" && *k != "value").map(|(k, v)| (k.clone(), v.clone())).collect();
        entities.insert(key.clone(), EntityRecord { ty, value: value.clone(), extras });
    }

    let type_of = |arg: &str| -> Option<String> {
        entities
            .get(arg)
            .map(|r: &EntityRecord| r.ty.clone())
            .or_else(|| domain.constant_type(arg).map(str::to_string))
    };
    let check_literal = |atom: &Atom, key: &str, violations: &mut Vec<String>| {
        let mut ok = true;
        for arg in &atom.args {
            if type_of(arg).is_none() {
                violations.push(format!("{key}: literal {atom} uses `{arg}`, which has no entity"));
                ok = false;
            }
        }
        if ok {
            for msg in check_atom(&domain.predicates, &domain.types, atom, &type_of) {
                violations.push(format!("{key}: {msg}"));
            }
        }
    };

    let mut init = Vec::new();
    let mut numeric = Vec::new();
    match obj.get(INIT_KEY) {
        None => violations.push(format!("missing `{INIT_KEY}`")),
        Some(v) => {
            if let Some(text) = state_text(v, INIT_KEY, &mut violations) {
                match parse_state_string(text) {
                    Err(e) => violations.push(format!("{INIT_KEY}: unparseable literal string: {e}")),
                    Ok(facts) => {
                        for f in facts {
                            match f {
                                StateFact::Literal(l) if !l.positive => {
                                    violations.push(format!("{INIT_KEY}: negative literal {l}"))
                                }
                                StateFact::Literal(l) => {
                                    check_literal(&l.atom, INIT_KEY, &mut violations);
                                    if !init.contains(&l.atom) {
                                        init.push(l.atom);
                                    }
                                }
                                StateFact::Numeric { fluent, args, value } => {
                                    let fact = NumericFact { fluent, args, value };
                                    check_numeric(&fact, domain, &type_of, &mut violations);
                                    if !numeric.contains(&fact) {
                                        numeric.push(fact);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    let mut goals = Vec::new();
    match obj.get(GOALS_KEY) {
        None => violations.push(format!("missing `{GOALS_KEY}`")),
        Some(v) => {
            if let Some(text) = state_text(v, GOALS_KEY, &mut violations) {
                match parse_state_string(text) {
                    Err(e) => violations.push(format!("{GOALS_KEY}: unparseable literal string: {e}")),
                    Ok(facts) => {
                        for f in facts {
                            match f {
                                StateFact::Literal(l) => {
                                    check_literal(&l.atom, GOALS_KEY, &mut violations);
                                    if !goals.contains(&l) {
                                        goals.push(l);
                                    }
                                }
                                StateFact::Numeric { fluent, .. } => {
                                    violations.push(format!("{GOALS_KEY}: numeric condition on `{fluent}`"))
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    if !violations.is_empty() {
        return Err(ValidationError { violations });
    }
    let warnings = goals
        .iter()
        .filter(|g| g.positive && init.contains(&g.atom))
        .map(|g| format!("goal {g} already holds in {INIT_KEY}"))
        .collect();
    Ok(TaskDictionary { entities, init, numeric, goals, warnings })
}

fn check_numeric(
    fact: &NumericFact,
    domain: &Domain,
    type_of: &dyn Fn(&str) -> Option<String>,
    violations: &mut Vec<String>,
) {
    let Some(decl) = domain.fluents.get(&fact.fluent) else {
        violations.push(format!("{INIT_KEY}: numeric assignment to undeclared fluent `{}`", fact.fluent));
        return;
    };
    if decl.params.len() != fact.args.len() {
        violations.push(format!("{INIT_KEY}: arity mismatch for function `{}`", fact.fluent));
        return;
    }
    for (arg, p) in fact.args.iter().zip(&decl.params) {
        match type_of(arg) {
            None => violations.push(format!("{INIT_KEY}: {fact} uses `{arg}`, which has no entity")),
            Some(t) if !domain.types.is_subtype(&t, &p.ty) => violations.push(format!(
                "{INIT_KEY}: type mismatch in {fact}: `{arg}` has type `{t}`, expected `{}`",
                p.ty
            )),
            Some(_) => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MergeError {
    #[error("entity `{0}` is defined differently by two intents")]
    ConflictingEntity(String),
    #[error("`{0}` is assigned two different values")]
    ConflictingNumeric(String),
}

/// Unions entities, initial literals and goals across dictionaries.
pub fn merge_task_dictionaries(dicts: &[TaskDictionary]) -> Result<TaskDictionary, MergeError> {
    let mut out = TaskDictionary::default();
    for d in dicts {
        for (k, r) in &d.entities {
            match out.entities.get(k) {
                Some(prev) if prev != r => return Err(MergeError::ConflictingEntity(k.clone())),
                Some(_) => {}
                None => {
                    out.entities.insert(k.clone(), r.clone());
                }
            }
        }
        for a in &d.init {
            if !out.init.contains(a) {
                out.init.push(a.clone());
            }
        }
        for n in &d.numeric {
            match out.numeric.iter().find(|m| m.fluent == n.fluent && m.args == n.args) {
                Some(m) if m.value != n.value => {
                    let term = std::iter::once(n.fluent.as_str()).chain(n.args.iter().map(String::as_str));
                    return Err(MergeError::ConflictingNumeric(format!("({})", term.collect::<Vec<_>>().join(" "))));
                }
                Some(_) => {}
                None => out.numeric.push(n.clone()),
            }
        }
        for g in &d.goals {
            if !out.goals.contains(g) {
                out.goals.push(g.clone());
            }
        }
    }
    out.warnings = out
        .goals
        .iter()
        .filter(|g| g.positive && out.init.contains(&g.atom))
        .map(|g| format!("goal {g} already holds in {INIT_KEY}"))
        .collect();
    Ok(out)
}
