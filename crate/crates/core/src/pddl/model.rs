//! Semantic model of the supported PDDL subset.

use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

pub const ROOT_TYPE: &str = "object";
pub const TOTAL_COST: &str = "total-cost";

/// Single-inheritance type hierarchy rooted at `object`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeHierarchy {
    parents: IndexMap<String, Option<String>>,
}

impl Default for TypeHierarchy {
    fn default() -> Self {
        let mut parents = IndexMap::new();
        parents.insert(ROOT_TYPE.to_string(), None);
        Self { parents }
    }
}

impl TypeHierarchy {
    pub(crate) fn insert(&mut self, name: String, parent: Option<String>) {
        self.parents.insert(name, parent);
    }

    pub fn contains(&self, name: &str) -> bool {
        self.parents.contains_key(name)
    }

    pub fn parent(&self, name: &str) -> Option<&str> {
        self.parents.get(name).and_then(|p| p.as_deref())
    }

    /// Declared type names in declaration order, `object` first.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.parents.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }

    /// True when `sub` equals `sup` or inherits from it.
    pub fn is_subtype(&self, sub: &str, sup: &str) -> bool {
        let mut cur = Some(sub);
        let mut steps = 0;
        while let Some(t) = cur {
            if t == sup {
                return true;
            }
            steps += 1;
            if steps > self.parents.len() {
                return false;
            }
            cur = self.parent(t);
        }
        false
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypedParam {
    /// Variable name including the leading `?`.
    pub name: String,
    pub ty: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateDecl {
    pub name: String,
    pub params: Vec<TypedParam>,
}

impl PredicateDecl {
    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

impl fmt::Display for PredicateDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.name)?;
        for p in &self.params {
            write!(f, " {} - {}", p.name, p.ty)?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FluentDecl {
    pub name: String,
    pub params: Vec<TypedParam>,
}

/// A predicate applied to arguments. Arguments are object names, or
/// variables (leading `?`) inside action schemas.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<String>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Self { predicate: predicate.into(), args: args.into_iter().map(Into::into).collect() }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub atom: Atom,
    pub positive: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Self { atom, positive: true }
    }

    pub fn neg(atom: Atom) -> Self {
        Self { atom, positive: false }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.atom)
        } else {
            write!(f, "(not {})", self.atom)
        }
    }
}

/// What an action adds to `total-cost`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CostTerm {
    Constant(i64),
    /// A static fluent applied to action parameters, e.g. `(database-cost ?f)`.
    Fluent { name: String, args: Vec<String> },
}

impl CostTerm {
    pub fn is_zero(&self) -> bool {
        matches!(self, CostTerm::Constant(0))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    pub params: Vec<TypedParam>,
    pub precondition: Vec<Literal>,
    pub add: Vec<Atom>,
    pub delete: Vec<Atom>,
    pub cost: CostTerm,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Domain {
    pub name: String,
    pub requirements: Vec<String>,
    pub types: TypeHierarchy,
    pub constants: Vec<(String, String)>,
    pub predicates: IndexMap<String, PredicateDecl>,
    pub fluents: IndexMap<String, FluentDecl>,
    pub actions: Vec<ActionSchema>,
}

impl Domain {
    pub fn action(&self, name: &str) -> Option<&ActionSchema> {
        self.actions.iter().find(|a| a.name == name)
    }

    pub fn predicate(&self, name: &str) -> Option<&PredicateDecl> {
        self.predicates.get(name)
    }

    pub fn constant_type(&self, name: &str) -> Option<&str> {
        self.constants.iter().find(|(n, _)| n == name).map(|(_, t)| t.as_str())
    }

    /// True when some action can increase `total-cost` by a nonzero amount.
    pub fn has_costs(&self) -> bool {
        self.actions.iter().any(|a| !a.cost.is_zero())
    }
}

/// A ground numeric assignment `(= (fluent args) value)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NumericFact {
    pub fluent: String,
    pub args: Vec<String>,
    pub value: i64,
}

impl fmt::Display for NumericFact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(= ({}", self.fluent)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ") {})", self.value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    MinimizeTotalCost,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub name: String,
    pub domain_name: String,
    pub objects: Vec<(String, String)>,
    pub init: Vec<Atom>,
    pub numeric: Vec<NumericFact>,
    pub goal: Vec<Literal>,
    pub metric: Option<Metric>,
}

impl Problem {
    pub fn object_type(&self, name: &str) -> Option<&str> {
        self.objects.iter().find(|(n, _)| n == name).map(|(_, t)| t.as_str())
    }

    pub fn numeric_value(&self, fluent: &str, args: &[String]) -> Option<i64> {
        self.numeric.iter().find(|n| n.fluent == fluent && n.args == args).map(|n| n.value)
    }

    /// Copy with every set-like member sorted, for order-insensitive comparison.
    pub fn canonical(&self) -> Problem {
        let mut p = self.clone();
        p.objects.sort();
        p.init.sort();
        p.init.dedup();
        p.numeric.sort();
        p.numeric.dedup();
        p.goal.sort();
        p.goal.dedup();
        p
    }
}
