//! Domain and problem readers.
//!
//! Readers collect every problem they can find before giving up, so a
//! single call reports all unknown types, undeclared predicates and arity
//! errors in a file.

use indexmap::IndexMap;

use super::error::{Diagnostic, PddlError};
use super::model::*;
use super::sexpr::{read_all, Pos, Sexp};

const SUPPORTED_REQUIREMENTS: &[&str] =
    &[":strips", ":typing", ":action-costs", ":negative-preconditions"];

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some('a'..='z'))
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-' || c == '_')
}

fn is_type_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some('a'..='z'))
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-')
}

/// Splits `a b - t c - u d` into `[(a,t), (b,t), (c,u), (d,object)]`.
fn typed_list<'a>(items: &'a [Sexp], diags: &mut Vec<Diagnostic>) -> Vec<(&'a str, Pos, Option<(&'a str, Pos)>)> {
    let mut out = Vec::new();
    let mut pending: Vec<(&str, Pos)> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let Some(text) = items[i].as_atom() else {
            diags.push(Diagnostic::new(items[i].pos(), "expected a name, found a list"));
            i += 1;
            continue;
        };
        if text == "-" {
            match items.get(i + 1) {
                Some(Sexp::Atom { text: ty, pos }) => {
                    if pending.is_empty() {
                        diags.push(Diagnostic::new(items[i].pos(), "type annotation without names"));
                    }
                    for (name, npos) in pending.drain(..) {
                        out.push((name, npos, Some((ty.as_str(), *pos))));
                    }
                }
                Some(other) => diags.push(Diagnostic::new(other.pos(), "unsupported type expression")),
                None => diags.push(Diagnostic::new(items[i].pos(), "missing type after '-'")),
            }
            i += 2;
            continue;
        }
        pending.push((text, items[i].pos()));
        i += 1;
    }
    for (name, npos) in pending {
        out.push((name, npos, None));
    }
    out
}

fn parse_params(
    list: &Sexp,
    types: &TypeHierarchy,
    diags: &mut Vec<Diagnostic>,
) -> Vec<TypedParam> {
    let Some(items) = list.as_list() else {
        diags.push(Diagnostic::new(list.pos(), "expected a parameter list"));
        return Vec::new();
    };
    let mut params: Vec<TypedParam> = Vec::new();
    for (name, pos, ty) in typed_list(items, diags) {
        if !name.starts_with('?') {
            diags.push(Diagnostic::new(pos, format!("parameter `{name}` must start with '?'")));
            continue;
        }
        let (ty, tpos) = ty.unwrap_or((ROOT_TYPE, pos));
        if !types.contains(ty) {
            diags.push(Diagnostic::new(tpos, format!("unknown type `{ty}`")));
        }
        if params.iter().any(|p| p.name == name) {
            diags.push(Diagnostic::new(pos, format!("duplicate variable `{name}`")));
        }
        params.push(TypedParam { name: name.to_string(), ty: ty.to_string() });
    }
    params
}

/// Checks predicate existence, arity and argument types. `type_of` maps an
/// argument (variable or object) to its declared type.
pub(crate) fn check_atom(
    domain_predicates: &IndexMap<String, PredicateDecl>,
    types: &TypeHierarchy,
    atom: &Atom,
    type_of: &dyn Fn(&str) -> Option<String>,
) -> Vec<String> {
    let mut errs = Vec::new();
    let Some(decl) = domain_predicates.get(&atom.predicate) else {
        errs.push(format!("undeclared predicate `{}`", atom.predicate));
        return errs;
    };
    if decl.arity() != atom.args.len() {
        errs.push(format!(
            "arity mismatch for `{}`: expected {}, found {}",
            atom.predicate,
            decl.arity(),
            atom.args.len()
        ));
        return errs;
    }
    for (i, (arg, param)) in atom.args.iter().zip(&decl.params).enumerate() {
        match type_of(arg) {
            None => errs.push(format!("undeclared argument `{arg}` in {atom}")),
            Some(t) if !types.is_subtype(&t, &param.ty) => errs.push(format!(
                "type mismatch in {atom}: argument {} `{arg}` has type `{t}`, expected `{}`",
                i + 1,
                param.ty
            )),
            Some(_) => {}
        }
    }
    errs
}

fn atom_from(expr: &Sexp, diags: &mut Vec<Diagnostic>) -> Option<Atom> {
    let items = match expr.as_list() {
        Some(items) if !items.is_empty() => items,
        _ => {
            diags.push(Diagnostic::new(expr.pos(), "expected an atom `(predicate args...)`"));
            return None;
        }
    };
    let mut parts = Vec::with_capacity(items.len());
    for item in items {
        match item.as_atom() {
            Some(t) => parts.push(t.to_string()),
            None => {
                diags.push(Diagnostic::new(item.pos(), "nested expression inside an atom"));
                return None;
            }
        }
    }
    let predicate = parts.remove(0);
    Some(Atom { predicate, args: parts })
}

fn literal_from(expr: &Sexp, diags: &mut Vec<Diagnostic>) -> Option<Literal> {
    if expr.head() == Some("not") {
        let items = expr.as_list().unwrap_or_default();
        if items.len() != 2 {
            diags.push(Diagnostic::new(expr.pos(), "`not` takes exactly one atom"));
            return None;
        }
        return atom_from(&items[1], diags).map(Literal::neg);
    }
    atom_from(expr, diags).map(Literal::pos)
}

/// Flattens `(and a b)` to `[a, b]`; anything else is a single conjunct.
fn conjuncts(expr: &Sexp) -> Vec<&Sexp> {
    match expr.as_list() {
        Some([]) => Vec::new(),
        Some(items) if expr.head() == Some("and") => items[1..].iter().collect(),
        _ => vec![expr],
    }
}

fn parse_integer(expr: &Sexp, diags: &mut Vec<Diagnostic>) -> Option<i64> {
    let text = expr.as_atom()?;
    match text.parse::<i64>() {
        Ok(v) => Some(v),
        Err(_) => {
            // `2.0` is an integer written as a decimal
            match text.parse::<f64>() {
                Ok(f) if f.fract() == 0.0 && f.is_finite() => Some(f as i64),
                _ => {
                    diags.push(Diagnostic::new(expr.pos(), format!("expected an integer, found `{text}`")));
                    None
                }
            }
        }
    }
}

fn split_define<'a>(
    src: &'a [Sexp],
    kind: &str,
) -> Result<(&'a str, Pos, &'a [Sexp]), PddlError> {
    let top = match src {
        [one] => one,
        [] => return Err(PddlError::single(Pos { line: 1, col: 1 }, "empty input")),
        [_, second, ..] => return Err(PddlError::single(second.pos(), "more than one top-level expression")),
    };
    let items = match top.as_list() {
        Some(items) if top.head() == Some("define") => items,
        _ => return Err(PddlError::single(top.pos(), "expected `(define ...)`")),
    };
    let header = items.get(1).ok_or_else(|| PddlError::single(top.pos(), format!("missing `({kind} <name>)`")))?;
    match header.as_list() {
        Some([Sexp::Atom { text: k, .. }, Sexp::Atom { text: name, pos }]) if k == kind => {
            Ok((name.as_str(), *pos, &items[2..]))
        }
        _ => Err(PddlError::single(header.pos(), format!("expected `({kind} <name>)`"))),
    }
}

/// Parses and validates a domain.
pub fn parse_domain(text: &str) -> Result<Domain, PddlError> {
    let exprs = read_all(text)?;
    let (name, name_pos, sections) = split_define(&exprs, "domain")?;
    let mut diags = Vec::new();
    if !is_identifier(name) {
        diags.push(Diagnostic::new(name_pos, format!("invalid domain name `{name}`")));
    }
    let mut domain = Domain {
        name: name.to_string(),
        requirements: Vec::new(),
        types: TypeHierarchy::default(),
        constants: Vec::new(),
        predicates: IndexMap::new(),
        fluents: IndexMap::new(),
        actions: Vec::new(),
    };

    // Types first: every other section refers to them.
    let mut ordered: Vec<&Sexp> = sections.iter().filter(|s| s.head() == Some(":types")).collect();
    ordered.extend(sections.iter().filter(|s| s.head() != Some(":types")));

    for section in ordered {
        let Some(items) = section.as_list() else {
            diags.push(Diagnostic::new(section.pos(), "expected a section list"));
            continue;
        };
        match section.head() {
            Some(":requirements") => {
                for r in &items[1..] {
                    match r.as_atom() {
                        Some(req) if SUPPORTED_REQUIREMENTS.contains(&req) => {
                            domain.requirements.push(req.to_string())
                        }
                        Some(req) => diags.push(Diagnostic::new(r.pos(), format!("unsupported requirement `{req}`"))),
                        None => diags.push(Diagnostic::new(r.pos(), "expected a requirement flag")),
                    }
                }
            }
            Some(":types") => parse_types(&items[1..], &mut domain.types, &mut diags),
            Some(":constants") => {
                for (c, pos, ty) in typed_list(&items[1..], &mut diags) {
                    let (ty, tpos) = ty.unwrap_or((ROOT_TYPE, pos));
                    if !domain.types.contains(ty) {
                        diags.push(Diagnostic::new(tpos, format!("unknown type `{ty}`")));
                    }
                    domain.constants.push((c.to_string(), ty.to_string()));
                }
            }
            Some(":predicates") => {
                for p in &items[1..] {
                    let Some(parts) = p.as_list().filter(|l| !l.is_empty()) else {
                        diags.push(Diagnostic::new(p.pos(), "expected `(name params...)`"));
                        continue;
                    };
                    let Some(pname) = parts[0].as_atom() else {
                        diags.push(Diagnostic::new(p.pos(), "predicate name must be a symbol"));
                        continue;
                    };
                    let params_expr = Sexp::List { items: parts[1..].to_vec(), pos: p.pos() };
                    let params = parse_params(&params_expr, &domain.types, &mut diags);
                    if domain.predicates.contains_key(pname) {
                        diags.push(Diagnostic::new(p.pos(), format!("predicate `{pname}` declared twice")));
                    }
                    domain.predicates.insert(pname.to_string(), PredicateDecl { name: pname.to_string(), params });
                }
            }
            Some(":functions") => {
                let mut i = 1;
                while i < items.len() {
                    let f = &items[i];
                    if f.as_atom() == Some("-") {
                        match items.get(i + 1).and_then(Sexp::as_atom) {
                            Some("number") => {}
                            _ => diags.push(Diagnostic::new(f.pos(), "only `number` functions are supported")),
                        }
                        i += 2;
                        continue;
                    }
                    i += 1;
                    let Some(parts) = f.as_list().filter(|l| !l.is_empty()) else {
                        diags.push(Diagnostic::new(f.pos(), "expected `(name params...)`"));
                        continue;
                    };
                    let Some(fname) = parts[0].as_atom() else {
                        diags.push(Diagnostic::new(f.pos(), "function name must be a symbol"));
                        continue;
                    };
                    let params_expr = Sexp::List { items: parts[1..].to_vec(), pos: f.pos() };
                    let params = parse_params(&params_expr, &domain.types, &mut diags);
                    domain.fluents.insert(fname.to_string(), FluentDecl { name: fname.to_string(), params });
                }
            }
            Some(":action") => {
                if let Some(action) = parse_action(items, section.pos(), &domain, &mut diags) {
                    if domain.action(&action.name).is_some() {
                        diags.push(Diagnostic::new(section.pos(), format!("action `{}` declared twice", action.name)));
                    }
                    domain.actions.push(action);
                }
            }
            Some(other) => diags.push(Diagnostic::new(section.pos(), format!("unsupported section `{other}`"))),
            None => diags.push(Diagnostic::new(section.pos(), "expected a section keyword")),
        }
    }

    if diags.is_empty() {
        Ok(domain)
    } else {
        diags.sort_by_key(|d| (d.pos.line, d.pos.col));
        Err(PddlError::new(diags))
    }
}

fn parse_types(items: &[Sexp], types: &mut TypeHierarchy, diags: &mut Vec<Diagnostic>) {
    let entries = typed_list(items, diags);
    let mut declared: IndexMap<&str, (Pos, &str)> = IndexMap::new();
    for (name, pos, parent) in &entries {
        if !is_type_name(name) {
            diags.push(Diagnostic::new(*pos, format!("invalid type name `{name}`")));
            continue;
        }
        let parent = parent.map(|(p, _)| p).unwrap_or(ROOT_TYPE);
        if *name == ROOT_TYPE {
            if parent != ROOT_TYPE {
                diags.push(Diagnostic::new(*pos, "`object` cannot have a parent"));
            }
            continue;
        }
        match declared.get(name) {
            Some((_, prev)) if *prev != parent => {
                diags.push(Diagnostic::new(*pos, format!("type `{name}` has more than one parent")))
            }
            Some(_) => {}
            None => {
                declared.insert(name, (*pos, parent));
            }
        }
    }
    // Parents mentioned only after a dash become children of `object`.
    let implicit: Vec<&str> = declared
        .values()
        .map(|(_, p)| *p)
        .filter(|p| *p != ROOT_TYPE && !declared.contains_key(p))
        .collect();
    for (name, (_, parent)) in &declared {
        types.insert(name.to_string(), Some(parent.to_string()));
    }
    for p in implicit {
        if !types.contains(p) {
            types.insert(p.to_string(), Some(ROOT_TYPE.to_string()));
        }
    }
    for (name, (pos, _)) in &declared {
        let mut cur = Some(*name);
        let mut steps = 0;
        while let Some(t) = cur {
            if t == ROOT_TYPE {
                break;
            }
            steps += 1;
            if steps > types.len() {
                diags.push(Diagnostic::new(*pos, format!("cyclic type hierarchy through `{name}`")));
                break;
            }
            cur = types.parent(t);
        }
    }
}

fn parse_action(items: &[Sexp], pos: Pos, domain: &Domain, diags: &mut Vec<Diagnostic>) -> Option<ActionSchema> {
    let Some(name) = items.get(1).and_then(Sexp::as_atom) else {
        diags.push(Diagnostic::new(pos, "action needs a name"));
        return None;
    };
    let mut params = Vec::new();
    let mut pre_expr = None;
    let mut eff_expr = None;
    let mut i = 2;
    while i < items.len() {
        let key = items[i].as_atom();
        let Some(val) = items.get(i + 1) else {
            diags.push(Diagnostic::new(items[i].pos(), "missing value after keyword"));
            break;
        };
        match key {
            Some(":parameters") => params = parse_params(val, &domain.types, diags),
            Some(":precondition") => pre_expr = Some(val),
            Some(":effect") => eff_expr = Some(val),
            _ => diags.push(Diagnostic::new(items[i].pos(), "unsupported action keyword")),
        }
        i += 2;
    }

    let type_of = |arg: &str| -> Option<String> {
        if arg.starts_with('?') {
            params.iter().find(|p| p.name == arg).map(|p| p.ty.clone())
        } else {
            domain.constant_type(arg).map(str::to_string)
        }
    };
    let check = |atom: &Atom, at: Pos, diags: &mut Vec<Diagnostic>| {
        for msg in check_atom(&domain.predicates, &domain.types, atom, &type_of) {
            diags.push(Diagnostic::new(at, msg));
        }
    };

    let mut precondition = Vec::new();
    if let Some(pre) = pre_expr {
        for c in conjuncts(pre) {
            match c.head() {
                Some("or" | "imply" | "exists" | "forall" | "when" | "=") => {
                    diags.push(Diagnostic::new(c.pos(), "unsupported precondition form"));
                }
                _ => {
                    if let Some(lit) = literal_from(c, diags) {
                        check(&lit.atom, c.pos(), diags);
                        precondition.push(lit);
                    }
                }
            }
        }
    }

    let mut add = Vec::new();
    let mut delete = Vec::new();
    let mut cost: Option<CostTerm> = None;
    if let Some(eff) = eff_expr {
        for c in conjuncts(eff) {
            match c.head() {
                Some("increase") => {
                    let parts = c.as_list().unwrap_or_default();
                    if parts.len() != 3 || parts[1].head() != Some(TOTAL_COST) {
                        diags.push(Diagnostic::new(c.pos(), "only `(increase (total-cost) <amount>)` is supported"));
                        continue;
                    }
                    if cost.is_some() {
                        diags.push(Diagnostic::new(c.pos(), "more than one cost increase"));
                    }
                    cost = parse_cost(&parts[2], &params, domain, diags);
                }
                Some("decrease" | "assign" | "scale-up" | "scale-down" | "when" | "forall") => {
                    diags.push(Diagnostic::new(c.pos(), "unsupported effect"));
                }
                _ => {
                    if let Some(lit) = literal_from(c, diags) {
                        check(&lit.atom, c.pos(), diags);
                        if lit.positive {
                            add.push(lit.atom);
                        } else {
                            delete.push(lit.atom);
                        }
                    }
                }
            }
        }
    }

    Some(ActionSchema {
        name: name.to_string(),
        params,
        precondition,
        add,
        delete,
        cost: cost.unwrap_or(CostTerm::Constant(0)),
    })
}

fn parse_cost(expr: &Sexp, params: &[TypedParam], domain: &Domain, diags: &mut Vec<Diagnostic>) -> Option<CostTerm> {
    if let Some(_text) = expr.as_atom() {
        let v = parse_integer(expr, diags)?;
        if v < 0 {
            diags.push(Diagnostic::new(expr.pos(), "action cost must be non-negative"));
            return None;
        }
        return Some(CostTerm::Constant(v));
    }
    let parts = expr.as_list().unwrap_or_default();
    let Some(fname) = parts.first().and_then(Sexp::as_atom) else {
        diags.push(Diagnostic::new(expr.pos(), "expected a cost amount"));
        return None;
    };
    let Some(decl) = domain.fluents.get(fname) else {
        diags.push(Diagnostic::new(expr.pos(), format!("undeclared function `{fname}`")));
        return None;
    };
    if fname == TOTAL_COST {
        diags.push(Diagnostic::new(expr.pos(), "cost cannot depend on total-cost"));
        return None;
    }
    let args: Vec<String> = parts[1..].iter().filter_map(Sexp::as_atom).map(str::to_string).collect();
    if args.len() != decl.params.len() || args.len() != parts.len() - 1 {
        diags.push(Diagnostic::new(expr.pos(), format!("arity mismatch for function `{fname}`")));
        return None;
    }
    for (arg, p) in args.iter().zip(&decl.params) {
        match params.iter().find(|q| &q.name == arg) {
            Some(q) if domain.types.is_subtype(&q.ty, &p.ty) => {}
            Some(q) => diags.push(Diagnostic::new(
                expr.pos(),
                format!("type mismatch in cost: `{arg}` has type `{}`, expected `{}`", q.ty, p.ty),
            )),
            None => diags.push(Diagnostic::new(expr.pos(), format!("undeclared variable `{arg}` in cost"))),
        }
    }
    Some(CostTerm::Fluent { name: fname.to_string(), args })
}

/// Parses a problem against an already validated domain.
pub fn parse_problem(text: &str, domain: &Domain) -> Result<Problem, PddlError> {
    let exprs = read_all(text)?;
    let (name, _, sections) = split_define(&exprs, "problem")?;
    let mut diags = Vec::new();
    let mut problem = Problem {
        name: name.to_string(),
        domain_name: String::new(),
        objects: Vec::new(),
        init: Vec::new(),
        numeric: Vec::new(),
        goal: Vec::new(),
        metric: None,
    };
    let mut init_expr = None;
    let mut goal_expr = None;
    for section in sections {
        let items = section.as_list().unwrap_or_default();
        match section.head() {
            Some(":domain") => match items.get(1).and_then(Sexp::as_atom) {
                Some(d) if d == domain.name => problem.domain_name = d.to_string(),
                Some(d) => diags.push(Diagnostic::new(
                    section.pos(),
                    format!("problem is for domain `{d}`, not `{}`", domain.name),
                )),
                None => diags.push(Diagnostic::new(section.pos(), "expected `(:domain <name>)`")),
            },
            Some(":requirements") => {}
            Some(":objects") => {
                for (obj, pos, ty) in typed_list(&items[1..], &mut diags) {
                    let (ty, tpos) = ty.unwrap_or((ROOT_TYPE, pos));
                    if !domain.types.contains(ty) {
                        diags.push(Diagnostic::new(tpos, format!("unknown type `{ty}`")));
                    }
                    if problem.object_type(obj).is_some() || domain.constant_type(obj).is_some() {
                        diags.push(Diagnostic::new(pos, format!("duplicate object `{obj}`")));
                        continue;
                    }
                    problem.objects.push((obj.to_string(), ty.to_string()));
                }
            }
            Some(":init") => init_expr = Some(&items[1..]),
            Some(":goal") => match items.get(1) {
                Some(g) if items.len() == 2 => goal_expr = Some(g),
                _ => diags.push(Diagnostic::new(section.pos(), "expected `(:goal <condition>)`")),
            },
            Some(":metric") => match items {
                [_, dir, f] if dir.as_atom() == Some("minimize") && f.head() == Some(TOTAL_COST) => {
                    problem.metric = Some(Metric::MinimizeTotalCost)
                }
                _ => diags.push(Diagnostic::new(section.pos(), "only `(:metric minimize (total-cost))` is supported")),
            },
            Some(other) => diags.push(Diagnostic::new(section.pos(), format!("unsupported section `{other}`"))),
            None => diags.push(Diagnostic::new(section.pos(), "expected a section keyword")),
        }
    }
    if problem.domain_name.is_empty() && !diags.iter().any(|d| d.message.contains("domain")) {
        diags.push(Diagnostic::new(Pos { line: 1, col: 1 }, "missing `(:domain <name>)`"));
    }

    let type_of = |arg: &str| -> Option<String> {
        problem
            .object_type(arg)
            .or_else(|| domain.constant_type(arg))
            .map(str::to_string)
    };

    let mut init = Vec::new();
    let mut numeric = Vec::new();
    for fact in init_expr.unwrap_or_default() {
        if fact.head() == Some("=") {
            match numeric_fact(fact, domain, &type_of, &mut diags) {
                Some(n) => numeric.push(n),
                None => continue,
            }
            continue;
        }
        if fact.head() == Some("not") {
            diags.push(Diagnostic::new(fact.pos(), "negative literal in initial state"));
            continue;
        }
        if let Some(atom) = atom_from(fact, &mut diags) {
            for msg in check_atom(&domain.predicates, &domain.types, &atom, &type_of) {
                diags.push(Diagnostic::new(fact.pos(), msg));
            }
            init.push(atom);
        }
    }

    let mut goal = Vec::new();
    if let Some(g) = goal_expr {
        for c in conjuncts(g) {
            let ground = c
                .as_list()
                .map(|items| {
                    let inner = if c.head() == Some("not") { items.get(1).and_then(Sexp::as_list) } else { Some(items) };
                    inner.is_some_and(|xs| xs.iter().all(|x| x.as_atom().is_some_and(|t| !t.starts_with('?'))))
                })
                .unwrap_or(false);
            let supported = !matches!(c.head(), Some("or" | "imply" | "exists" | "forall" | "and" | "="));
            if !ground || !supported {
                diags.push(Diagnostic::new(c.pos(), "goal is not a conjunction of ground literals"));
                continue;
            }
            if let Some(lit) = literal_from(c, &mut diags) {
                for msg in check_atom(&domain.predicates, &domain.types, &lit.atom, &type_of) {
                    diags.push(Diagnostic::new(c.pos(), msg));
                }
                goal.push(lit);
            }
        }
    }
    problem.init = init;
    problem.numeric = numeric;
    problem.goal = goal;
    if domain.has_costs() && problem.numeric_value(TOTAL_COST, &[]).is_none() {
        problem.numeric.push(NumericFact { fluent: TOTAL_COST.to_string(), args: Vec::new(), value: 0 });
    }

    if diags.is_empty() {
        Ok(problem)
    } else {
        diags.sort_by_key(|d| (d.pos.line, d.pos.col));
        Err(PddlError::new(diags))
    }
}

pub(crate) fn numeric_fact(
    fact: &Sexp,
    domain: &Domain,
    type_of: &dyn Fn(&str) -> Option<String>,
    diags: &mut Vec<Diagnostic>,
) -> Option<NumericFact> {
    let items = fact.as_list().unwrap_or_default();
    let (Some(target), Some(value)) = (items.get(1), items.get(2)) else {
        diags.push(Diagnostic::new(fact.pos(), "expected `(= (<function> args...) <value>)`"));
        return None;
    };
    if items.len() != 3 {
        diags.push(Diagnostic::new(fact.pos(), "expected `(= (<function> args...) <value>)`"));
        return None;
    }
    let atom = atom_from(target, diags)?;
    let Some(decl) = domain.fluents.get(&atom.predicate) else {
        diags.push(Diagnostic::new(fact.pos(), format!("numeric assignment to undeclared fluent `{}`", atom.predicate)));
        return None;
    };
    if decl.params.len() != atom.args.len() {
        diags.push(Diagnostic::new(fact.pos(), format!("arity mismatch for function `{}`", atom.predicate)));
        return None;
    }
    for (arg, p) in atom.args.iter().zip(&decl.params) {
        match type_of(arg) {
            None => diags.push(Diagnostic::new(fact.pos(), format!("undeclared argument `{arg}` in {atom}"))),
            Some(t) if !domain.types.is_subtype(&t, &p.ty) => diags.push(Diagnostic::new(
                fact.pos(),
                format!("type mismatch in {atom}: `{arg}` has type `{t}`, expected `{}`", p.ty),
            )),
            Some(_) => {}
        }
    }
    let value = parse_integer(value, diags)?;
    Some(NumericFact { fluent: atom.predicate, args: atom.args, value })
}

/// One fact of a state string: a literal or a numeric assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StateFact {
    Literal(Literal),
    Numeric { fluent: String, args: Vec<String>, value: i64 },
}

/// Parses a space-separated literal sequence, optionally wrapped in
/// `(and ...)`. Only syntax is checked here.
pub fn parse_state_string(text: &str) -> Result<Vec<StateFact>, PddlError> {
    let exprs = read_all(text)?;
    let mut diags = Vec::new();
    let mut out = Vec::new();
    let flat: Vec<&Sexp> = exprs.iter().flat_map(conjuncts).collect();
    for e in flat {
        if e.as_atom().is_some() {
            diags.push(Diagnostic::new(e.pos(), "expected a parenthesised literal"));
            continue;
        }
        match e.head() {
            Some("=") => {
                let items = e.as_list().unwrap_or_default();
                if items.len() != 3 {
                    diags.push(Diagnostic::new(e.pos(), "expected `(= (<function> args...) <value>)`"));
                    continue;
                }
                let Some(atom) = atom_from(&items[1], &mut diags) else { continue };
                let Some(value) = parse_integer(&items[2], &mut diags) else { continue };
                out.push(StateFact::Numeric { fluent: atom.predicate, args: atom.args, value });
            }
            Some("or" | "imply" | "exists" | "forall" | "and") => {
                diags.push(Diagnostic::new(e.pos(), "only literals are allowed in a state"))
            }
            _ => {
                if let Some(lit) = literal_from(e, &mut diags) {
                    out.push(StateFact::Literal(lit));
                }
            }
        }
    }
    if diags.is_empty() {
        Ok(out)
    } else {
        Err(PddlError::new(diags))
    }
}
