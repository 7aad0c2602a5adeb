//! Executors: the low-level implementation of each domain action and the
//! monitor that checks its expected effect.
//!
//! Argument lists are the grounded action's arguments, agent first.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::{json, Map, Value};

use super::query::{parse_query, QueryError};
use super::state::{Chart, ContentItem, Deck, ExecutionState, ModelInfo, Payload, Record, Series, Slide, SlideItem};
use super::table::{Cell, Table, TableError};
use super::tree::{DecisionTree, TreeError, DEFAULT_MAX_DEPTH};
use super::world::{normalize_path, Appointment, FileData, OfficeWorld};
use crate::prompt::{BackendError, CompletionBackend, REQUEST_MARKER};

/// Container tag written into generated presentation files.
pub const PRESENTATION_FORMAT: &str = "planx-presentation";

/// The only learning algorithm available to `learn-supervised`.
pub const DECISION_TREE: &str = "DecisionTreeClassifier";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExecError {
    #[error("action has no argument {0}")]
    Arity(usize),
    #[error("no state entry `{0}`")]
    Missing(String),
    #[error("`{name}` holds {found}, expected {expected}")]
    Kind { name: String, expected: &'static str, found: &'static str },
    #[error("no file `{0}` in the world")]
    NoFile(String),
    #[error("query `{name}`: {source}")]
    Query { name: String, source: QueryError },
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("completion backend: {0}")]
    Backend(#[from] BackendError),
    #[error("{0}")]
    Invalid(String),
}

/// Services executors may use besides the state and the world.
#[derive(Clone)]
pub struct Env {
    pub llm: Option<Arc<dyn CompletionBackend>>,
    pub max_depth: usize,
}

impl Default for Env {
    fn default() -> Self {
        Self { llm: None, max_depth: DEFAULT_MAX_DEPTH }
    }
}

impl std::fmt::Debug for Env {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Env").field("llm", &self.llm.as_ref().map(|b| b.id().to_string())).finish()
    }
}

pub trait Executor: Send + Sync {
    fn apply(&self, args: &[String], state: &mut ExecutionState, world: &mut OfficeWorld, env: &Env)
        -> Result<(), ExecError>;

    /// The monitor. Must not change anything.
    fn succeeded(&self, args: &[String], state: &ExecutionState, world: &OfficeWorld) -> bool;

    /// Whether the inputs the action draws from the world are present. A
    /// failed action is offered to the replanner again only when ready.
    fn ready(&self, _args: &[String], _state: &ExecutionState, _world: &OfficeWorld) -> bool {
        true
    }
}

type ApplyFn = fn(&[String], &mut ExecutionState, &mut OfficeWorld, &Env) -> Result<(), ExecError>;
type CheckFn = fn(&[String], &ExecutionState, &OfficeWorld) -> bool;

struct Builtin {
    apply: ApplyFn,
    check: CheckFn,
    ready: Option<CheckFn>,
}

impl Executor for Builtin {
    fn apply(&self, args: &[String], state: &mut ExecutionState, world: &mut OfficeWorld, env: &Env) -> Result<(), ExecError> {
        (self.apply)(args, state, world, env)
    }

    fn succeeded(&self, args: &[String], state: &ExecutionState, world: &OfficeWorld) -> bool {
        args.len() > 1 && (self.check)(args, state, world)
    }

    fn ready(&self, args: &[String], state: &ExecutionState, world: &OfficeWorld) -> bool {
        self.ready.is_none_or(|r| r(args, state, world))
    }
}

#[derive(Clone, Default)]
pub struct Registry {
    executors: BTreeMap<String, Arc<dyn Executor>>,
}

impl Registry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Every action of the shipped domain.
    pub fn builtin() -> Self {
        let mut r = Self::empty();
        for (name, apply, check, ready) in catalog() {
            r.register(name, Arc::new(Builtin { apply, check, ready }));
        }
        r
    }

    pub fn register(&mut self, action: &str, executor: Arc<dyn Executor>) {
        self.executors.insert(action.to_string(), executor);
    }

    pub fn get(&self, action: &str) -> Option<&Arc<dyn Executor>> {
        self.executors.get(action)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.executors.keys().map(String::as_str)
    }
}

impl std::fmt::Debug for Registry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.executors.keys()).finish()
    }
}

// ------------------------------------------------------------------ helpers

fn arg(args: &[String], i: usize) -> Result<&str, ExecError> {
    args.get(i).map(String::as_str).ok_or(ExecError::Arity(i))
}

fn record<'a>(state: &'a ExecutionState, name: &str) -> Result<&'a Record, ExecError> {
    state.get(name).ok_or_else(|| ExecError::Missing(name.to_string()))
}

fn kind_err(name: &str, expected: &'static str, found: &Payload) -> ExecError {
    ExecError::Kind { name: name.to_string(), expected, found: found.kind() }
}

/// A scalar entry as text: file paths, queries, column names, titles.
fn text(state: &ExecutionState, name: &str) -> Result<String, ExecError> {
    match &record(state, name)?.value {
        Payload::Text(s) => Ok(s.clone()),
        p @ Payload::Number(_) => Ok(p.render()),
        other => Err(kind_err(name, "text", other)),
    }
}

fn table<'a>(state: &'a ExecutionState, name: &str) -> Result<&'a Table, ExecError> {
    match &record(state, name)?.value {
        Payload::Table(t) => Ok(t),
        other => Err(kind_err(name, "table", other)),
    }
}

/// Any produced value, rendered as text.
fn content(state: &ExecutionState, name: &str) -> Result<String, ExecError> {
    match &record(state, name)?.value {
        Payload::Empty => Err(ExecError::Kind { name: name.to_string(), expected: "contents", found: "empty" }),
        p => Ok(p.render()),
    }
}

fn set(state: &mut ExecutionState, name: &str, value: Payload) {
    state.set(name, value);
}

fn set_extra(state: &mut ExecutionState, name: &str, key: &str, value: Value) {
    if let Some(r) = state.get_mut(name) {
        r.extras.insert(key.to_string(), value);
    }
}

fn is_table(state: &ExecutionState, name: &str) -> bool {
    matches!(state.value(name), Some(Payload::Table(_)))
}

fn is_text(state: &ExecutionState, name: &str) -> bool {
    matches!(state.value(name), Some(Payload::Text(_)))
}

fn check_table(args: &[String], i: usize, state: &ExecutionState) -> bool {
    args.get(i).is_some_and(|n| is_table(state, n))
}

fn check_text(args: &[String], i: usize, state: &ExecutionState) -> bool {
    args.get(i).is_some_and(|n| is_text(state, n))
}

fn slide_mut<'a>(state: &'a mut ExecutionState, name: &str) -> Result<&'a mut Slide, ExecError> {
    let rec = state.get_mut(name).ok_or_else(|| ExecError::Missing(name.to_string()))?;
    match &mut rec.value {
        Payload::Slide(s) => Ok(s),
        other => Err(kind_err(name, "slide", other)),
    }
}

fn deck_mut<'a>(state: &'a mut ExecutionState, name: &str) -> Result<&'a mut Deck, ExecError> {
    let rec = state.get_mut(name).ok_or_else(|| ExecError::Missing(name.to_string()))?;
    match &mut rec.value {
        Payload::Deck(d) => Ok(d),
        other => Err(kind_err(name, "presentation", other)),
    }
}

fn slide<'a>(state: &'a ExecutionState, name: &str) -> Option<&'a Slide> {
    match state.value(name)? {
        Payload::Slide(s) => Some(s),
        _ => None,
    }
}

fn deck<'a>(state: &'a ExecutionState, name: &str) -> Option<&'a Deck> {
    match state.value(name)? {
        Payload::Deck(d) => Some(d),
        _ => None,
    }
}

fn slide_has(state: &ExecutionState, slide_name: &str, source: &str) -> bool {
    slide(state, slide_name).is_some_and(|s| s.items.iter().any(|i| i.source() == source))
}

fn file_exists(world: &OfficeWorld, state: &ExecutionState, name: &str) -> bool {
    text(state, name).ok().and_then(|p| world.resolve(&p)).is_some()
}

/// Where a write to the file entry `name` lands: an existing file it
/// resolves to, else its normalized path.
fn target_path(world: &OfficeWorld, state: &ExecutionState, name: &str) -> Result<String, ExecError> {
    let p = text(state, name)?;
    if p.trim().is_empty() {
        return Err(ExecError::Invalid(format!("`{name}` has no path")));
    }
    Ok(world.files.contains_key(&normalize_path(&p)).then(|| normalize_path(&p)).unwrap_or_else(|| {
        world.resolve(&p).unwrap_or_else(|| normalize_path(&p))
    }))
}

fn outbox_has(world: &OfficeWorld, pred: impl Fn(&Map<String, Value>) -> bool) -> bool {
    world.outbox.iter().filter_map(Value::as_object).any(pred)
}

fn complete(env: &Env, request: String) -> Result<String, ExecError> {
    let llm = env.llm.as_ref().ok_or_else(|| ExecError::Invalid("no completion backend configured".into()))?;
    let prompt = format!("You are an office assistant. Answer the request below.\n{REQUEST_MARKER}{request}");
    Ok(llm.complete(&prompt)?.trim().to_string())
}

/// `row` records: a JSON object keyed by column or a positional array.
fn row_for(state: &ExecutionState, name: &str, columns: &[String]) -> Result<Vec<Cell>, ExecError> {
    let rec = record(state, name)?;
    let value = match &rec.value {
        Payload::Json(v) => v.clone(),
        Payload::Text(s) => serde_json::from_str(s).map_err(|e| ExecError::Invalid(format!("row `{name}`: {e}")))?,
        other => return Err(kind_err(name, "row", other)),
    };
    match value {
        Value::Object(m) => {
            if let Some(k) = m.keys().find(|k| !columns.contains(k)) {
                return Err(ExecError::Table(TableError::NoColumn(k.clone())));
            }
            Ok(columns.iter().map(|c| m.get(c).map(Cell::from_json).unwrap_or(Cell::Null)).collect())
        }
        Value::Array(a) if a.len() == columns.len() => Ok(a.iter().map(Cell::from_json).collect()),
        _ => Err(ExecError::Invalid(format!("row `{name}` does not fit columns {columns:?}"))),
    }
}

fn row_object(state: &ExecutionState, name: &str) -> Result<Map<String, Value>, ExecError> {
    match &record(state, name)?.value {
        Payload::Json(Value::Object(m)) => Ok(m.clone()),
        Payload::Text(s) => match serde_json::from_str(s) {
            Ok(Value::Object(m)) => Ok(m),
            _ => Err(ExecError::Invalid(format!("row `{name}` is not an object"))),
        },
        other => Err(kind_err(name, "row", other)),
    }
}

/// Rows of `d` picked by the `contents` entry `c`: the rows it lists when
/// it is a table, all rows otherwise.
fn selected(state: &ExecutionState, d: &Table, c: &str) -> Vec<bool> {
    match state.table(c) {
        Some(sel) => d.rows.iter().map(|r| d.contains_row_of(r, sel)).collect(),
        None => vec![true; d.len()],
    }
}

fn set_column(d: &Table, column: &str, value: &Cell, picked: &[bool], create: bool) -> Result<Table, ExecError> {
    let mut out = d.clone();
    let i = match out.column_index(column) {
        Ok(i) => i,
        Err(e) if !create => return Err(e.into()),
        Err(_) => {
            out.columns.push(column.to_string());
            for r in &mut out.rows {
                r.push(Cell::Null);
            }
            out.columns.len() - 1
        }
    };
    for (r, &p) in out.rows.iter_mut().zip(picked) {
        if p {
            r[i] = value.clone();
        }
    }
    Ok(out)
}

fn presentation_json(state: &ExecutionState, p: &str) -> Result<Value, ExecError> {
    let d = deck(state, p).ok_or_else(|| ExecError::Missing(p.to_string()))?;
    let mut slides = Vec::new();
    for s in &d.slides {
        let sl = slide(state, s).ok_or_else(|| ExecError::Missing(s.clone()))?;
        slides.push(json!({"name": sl.name, "title": sl.title, "items": sl.items}));
    }
    Ok(json!({"format": PRESENTATION_FORMAT, "version": 1, "name": d.name, "slides": slides, "notes": d.notes}))
}

fn date_hour(start: &str) -> Option<(i64, i64)> {
    let year = start.get(0..4)?.parse().ok()?;
    let hour = start.split_once('T').and_then(|(_, t)| t.get(0..2)).and_then(|h| h.parse().ok()).unwrap_or(0);
    Some((year, hour))
}

fn appointment_for(state: &ExecutionState, name: &str) -> Result<Appointment, ExecError> {
    let rec = record(state, name)?;
    let mut fields = rec.extras.clone();
    if let Payload::Json(Value::Object(m)) = &rec.value {
        fields.extend(m.clone());
    }
    let subject = match (fields.get("subject").and_then(Value::as_str), &rec.value) {
        (Some(s), _) => s.to_string(),
        (None, Payload::Text(t)) if !t.is_empty() => t.clone(),
        _ => return Err(ExecError::Invalid(format!("appointment `{name}` has no subject"))),
    };
    let start = fields
        .get("start")
        .and_then(Value::as_str)
        .ok_or_else(|| ExecError::Invalid(format!("appointment `{name}` has no start")))?
        .to_string();
    let (year, hour) = date_hour(&start).ok_or_else(|| ExecError::Invalid(format!("bad start time `{start}`")))?;
    Ok(Appointment {
        subject,
        start,
        hour: fields.get("hour").and_then(Value::as_i64).unwrap_or(hour),
        year: fields.get("year").and_then(Value::as_i64).unwrap_or(year),
        isrecurring: fields.get("isrecurring").and_then(Value::as_bool).unwrap_or(false),
    })
}

fn email_key(state: &ExecutionState, name: &str) -> Result<String, ExecError> {
    let rec = record(state, name)?;
    if let Some(id) = rec.extra_str("id") {
        return Ok(id.to_string());
    }
    match &rec.value {
        Payload::Text(t) if !t.is_empty() => Ok(t.clone()),
        _ => Ok(name.to_string()),
    }
}

fn recipient(state: &ExecutionState, name: &str) -> Result<(String, String), ExecError> {
    let rec = record(state, name)?;
    let to = match (rec.extra_str("to"), &rec.value) {
        (Some(t), _) => t.to_string(),
        (None, Payload::Text(t)) if t.contains('@') => t.clone(),
        _ => return Err(ExecError::Invalid(format!("email `{name}` has no recipient"))),
    };
    let subject = rec.extra_str("subject").unwrap_or("Response").to_string();
    Ok((to, subject))
}

fn model_info<'a>(state: &'a ExecutionState, name: &str) -> Result<&'a ModelInfo, ExecError> {
    match &record(state, name)?.value {
        Payload::Model(m) => Ok(m),
        other => Err(kind_err(name, "model", other)),
    }
}

// ---------------------------------------------------------------- data

fn read_data(a: &[String], s: &mut ExecutionState, w: &mut OfficeWorld, _: &Env) -> Result<(), ExecError> {
    let (d, f) = (arg(a, 1)?, arg(a, 2)?);
    let path = text(s, f)?;
    let resolved = w.resolve(&path).ok_or_else(|| ExecError::NoFile(path.clone()))?;
    let Some(FileData::Table(t)) = w.files.get(&resolved) else {
        return Err(ExecError::Invalid(format!("`{resolved}` is not a table")));
    };
    let columns = t.columns.clone();
    let mut rec = Record::new("dataframe", Payload::Table(t.clone()));
    rec.extras.insert("columns".into(), json!(columns));
    rec.extras.insert("source".into(), json!(resolved));
    s.insert(d, rec);
    for col in &columns {
        if !s.contains(col) {
            let name = format!("{}_column", col.replace(' ', "-")).to_lowercase();
            s.insert(&name, Record::new("column", Payload::Text(col.clone())));
        }
    }
    Ok(())
}

fn read_data_ok(a: &[String], s: &ExecutionState, _: &OfficeWorld) -> bool {
    check_table(a, 1, s)
}

fn read_data_ready(a: &[String], s: &ExecutionState, w: &OfficeWorld) -> bool {
    a.get(2).is_some_and(|f| file_exists(w, s, f))
}

fn connect_api(a: &[String], s: &mut ExecutionState, w: &mut OfficeWorld, _: &Env) -> Result<(), ExecError> {
    let (api, c, t, d) = (arg(a, 1)?, arg(a, 2)?, arg(a, 3)?, arg(a, 4)?);
    let key = text(s, api)?;
    let source = w.apis.get(&key).ok_or_else(|| ExecError::NoFile(format!("api `{key}`")))?;
    let column = text(s, c).unwrap_or_default();
    let wanted = text(s, t).unwrap_or_default();
    let out = if column.is_empty() || wanted.is_empty() {
        source.clone()
    } else {
        let i = source.column_index(&column)?;
        let v = Cell::parse(&wanted);
        Table { columns: source.columns.clone(), rows: source.rows.iter().filter(|r| r[i].same(&v)).cloned().collect() }
    };
    set(s, d, Payload::Table(out));
    Ok(())
}

fn connect_api_ok(a: &[String], s: &ExecutionState, _: &OfficeWorld) -> bool {
    check_table(a, 4, s)
}

fn connect_api_ready(a: &[String], s: &ExecutionState, w: &OfficeWorld) -> bool {
    a.get(1).and_then(|n| text(s, n).ok()).is_some_and(|k| w.apis.contains_key(&k))
}

fn read_text_file(a: &[String], s: &mut ExecutionState, w: &mut OfficeWorld, _: &Env) -> Result<(), ExecError> {
    let (t, f) = (arg(a, 1)?, arg(a, 2)?);
    let path = text(s, f)?;
    let body = w.text(&path).ok_or_else(|| ExecError::NoFile(path.clone()))?.to_string();
    set(s, t, Payload::Text(body));
    Ok(())
}

fn read_text_ready(a: &[String], s: &ExecutionState, w: &OfficeWorld) -> bool {
    a.get(2).is_some_and(|f| file_exists(w, s, f))
}

fn text_in_1(a: &[String], s: &ExecutionState, _: &OfficeWorld) -> bool {
    check_text(a, 1, s)
}

fn save_text(a: &[String], s: &mut ExecutionState, w: &mut OfficeWorld, _: &Env) -> Result<(), ExecError> {
    let (t, f) = (arg(a, 1)?, arg(a, 2)?);
    let body = content(s, t)?;
    let path = target_path(w, s, f)?;
    w.files.insert(path.clone(), FileData::Text(body));
    set_extra(s, f, "saved", json!(path));
    Ok(())
}

fn save_text_ok(a: &[String], s: &ExecutionState, w: &OfficeWorld) -> bool {
    let (Some(t), Some(f)) = (a.get(1), a.get(2)) else { return false };
    let Some(path) = s.get(f).and_then(|r| r.extra_str("saved")) else { return false };
    matches!((w.files.get(path), content(s, t)), (Some(FileData::Text(x)), Ok(y)) if *x == y)
}

fn query(a: &[String], s: &mut ExecutionState, _: &mut OfficeWorld, _: &Env) -> Result<(), ExecError> {
    let (q, d, d1) = (arg(a, 1)?, arg(a, 2)?, arg(a, 3)?);
    let source = text(s, q)?;
    let parsed = parse_query(&source).map_err(|e| ExecError::Query { name: q.to_string(), source: e })?;
    let out = parsed.apply(table(s, d)?).map_err(|e| ExecError::Query { name: q.to_string(), source: e })?;
    set(s, d1, Payload::Table(out));
    set_extra(s, d1, "query", json!(source));
    Ok(())
}

fn query_ok(a: &[String], s: &ExecutionState, _: &OfficeWorld) -> bool {
    check_table(a, 3, s)
}

/// Dispatches on the data-type object's type: `count` counts rows,
/// `value-counts` tallies the first column, `value` takes the first cell.
/// Other data types name an operation in their value (`count`, `columns`,
/// `first`, `sum`, `mean`); anything else copies the table.
fn extract_data(a: &[String], s: &mut ExecutionState, _: &mut OfficeWorld, _: &Env) -> Result<(), ExecError> {
    let (dt, d, dc) = (arg(a, 1)?, arg(a, 2)?, arg(a, 3)?);
    let ty = record(s, dt)?.ty.clone();
    let op = match ty.as_str() {
        "count" | "value-counts" | "value" => ty,
        _ => text(s, dt).unwrap_or_default().trim().to_lowercase(),
    };
    let t = table(s, d)?.clone();
    let first_column = |t: &Table| -> Result<Vec<Cell>, ExecError> {
        let col = t.columns.first().ok_or_else(|| ExecError::Invalid(format!("`{d}` has no columns")))?;
        Ok(t.column(col)?)
    };
    let numbers = |t: &Table| -> Result<Vec<f64>, ExecError> { Ok(first_column(t)?.iter().filter_map(Cell::as_f64).collect()) };
    let value = match op.as_str() {
        "count" | "rows" => Payload::Number(t.len() as f64),
        "value-counts" => {
            let mut counts: Vec<(Cell, i64)> = Vec::new();
            for c in first_column(&t)? {
                match counts.iter_mut().find(|(k, _)| k.same(&c)) {
                    Some((_, n)) => *n += 1,
                    None => counts.push((c, 1)),
                }
            }
            counts.sort_by(|x, y| y.1.cmp(&x.1));
            let name = t.columns[0].clone();
            Payload::Table(Table { columns: vec![name, "count".into()], rows: counts.into_iter().map(|(k, n)| vec![k, Cell::Int(n)]).collect() })
        }
        "value" => match t.rows.first().and_then(|r| r.first()) {
            Some(Cell::Int(i)) => Payload::Number(*i as f64),
            Some(Cell::Float(f)) => Payload::Number(*f),
            Some(c) => Payload::Text(c.to_string()),
            None => return Err(ExecError::Invalid(format!("`{d}` is empty"))),
        },
        "columns" => Payload::Text(t.columns.join(", ")),
        "first" => Payload::Table(Table { columns: t.columns.clone(), rows: t.rows.iter().take(1).cloned().collect() }),
        "sum" => Payload::Number(numbers(&t)?.iter().sum()),
        "mean" => {
            let v = numbers(&t)?;
            if v.is_empty() {
                return Err(ExecError::Invalid("mean of no numbers".into()));
            }
            Payload::Number(v.iter().sum::<f64>() / v.len() as f64)
        }
        _ => Payload::Table(t),
    };
    set(s, dt, value.clone());
    set(s, dc, value);
    Ok(())
}

fn extract_data_ok(a: &[String], s: &ExecutionState, _: &OfficeWorld) -> bool {
    a.get(3).and_then(|n| s.value(n)).is_some_and(|v| *v != Payload::Empty)
}

fn create_data(a: &[String], s: &mut ExecutionState, _: &mut OfficeWorld, _: &Env) -> Result<(), ExecError> {
    let (d, r, d1) = (arg(a, 1)?, arg(a, 2)?, arg(a, 3)?);
    let mut t = table(s, d)?.clone();
    let row = row_for(s, r, &t.columns)?;
    t.push(row)?;
    set(s, d1, Payload::Table(t));
    Ok(())
}

fn create_data_ok(a: &[String], s: &ExecutionState, _: &OfficeWorld) -> bool {
    let (Some(r), Some(d1)) = (a.get(2), a.get(3)) else { return false };
    let Some(t) = s.table(d1) else { return false };
    row_for(s, r, &t.columns).is_ok_and(|row| t.rows.contains(&row))
}

fn delete_data(a: &[String], s: &mut ExecutionState, _: &mut OfficeWorld, _: &Env) -> Result<(), ExecError> {
    let (d, d1, d2) = (arg(a, 1)?, arg(a, 2)?, arg(a, 3)?);
    let t = table(s, d)?;
    let gone = table(s, d1)?;
    let out = Table { columns: t.columns.clone(), rows: t.rows.iter().filter(|r| !t.contains_row_of(r, gone)).cloned().collect() };
    set(s, d2, Payload::Table(out));
    Ok(())
}

fn delete_data_ok(a: &[String], s: &ExecutionState, _: &OfficeWorld) -> bool {
    let (Some(d1), Some(d2)) = (a.get(2), a.get(3)) else { return false };
    match (s.table(d1), s.table(d2)) {
        (Some(gone), Some(out)) => !out.rows.iter().any(|r| out.contains_row_of(r, gone)),
        _ => false,
    }
}

fn modify(a: &[String], s: &mut ExecutionState, create: bool) -> Result<(), ExecError> {
    let (d, c, co, t, d1) = (arg(a, 1)?, arg(a, 2)?, arg(a, 3)?, arg(a, 4)?, arg(a, 5)?);
    let src = table(s, d)?;
    let picked = selected(s, src, c);
    let column = text(s, co)?;
    let value = Cell::parse(&text(s, t)?);
    let out = set_column(src, &column, &value, &picked, create)?;
    set(s, d1, Payload::Table(out));
    Ok(())
}

fn modify_data(a: &[String], s: &mut ExecutionState, _: &mut OfficeWorld, _: &Env) -> Result<(), ExecError> {
    modify(a, s, false)
}

fn add_value(a: &[String], s: &mut ExecutionState, _: &mut OfficeWorld, _: &Env) -> Result<(), ExecError> {
    modify(a, s, true)
}

fn modify_ok(a: &[String], s: &ExecutionState, _: &OfficeWorld) -> bool {
    let (Some(d), Some(c), Some(co), Some(t), Some(d1)) = (a.get(1), a.get(2), a.get(3), a.get(4), a.get(5)) else {
        return false;
    };
    let (Some(src), Some(out), Ok(column), Ok(value)) = (s.table(d), s.table(d1), text(s, co), text(s, t)) else {
        return false;
    };
    let value = Cell::parse(&value);
    let picked = selected(s, src, c);
    out.len() == src.len()
        && out.column(&column).is_ok_and(|cells| cells.iter().zip(&picked).all(|(x, &p)| !p || x.same(&value)))
}

/// The first key of the row object identifies the rows to change; the
/// other keys are the new values.
fn modify_row(a: &[String], s: &mut ExecutionState, _: &mut OfficeWorld, _: &Env) -> Result<(), ExecError> {
    let (d, r, d1) = (arg(a, 1)?, arg(a, 2)?, arg(a, 3)?);
    let mut t = table(s, d)?.clone();
    let fields = row_object(s, r)?;
    let mut it = fields.iter();
    let (key, id) = it.next().ok_or_else(|| ExecError::Invalid(format!("row `{r}` is empty")))?;
    let ki = t.column_index(key)?;
    let id = Cell::from_json(id);
    let updates: Vec<(usize, Cell)> =
        it.map(|(k, v)| Ok((t.column_index(k)?, Cell::from_json(v)))).collect::<Result<_, ExecError>>()?;
    let mut hit = false;
    for row in t.rows.iter_mut().filter(|row| row[ki].same(&id)) {
        hit = true;
        for (i, v) in &updates {
            row[*i] = v.clone();
        }
    }
    if !hit {
        return Err(ExecError::Invalid(format!("no row with {key} = {id}")));
    }
    set(s, d1, Payload::Table(t));
    Ok(())
}

fn modify_row_ok(a: &[String], s: &ExecutionState, _: &OfficeWorld) -> bool {
    let (Some(r), Some(d1)) = (a.get(2), a.get(3)) else { return false };
    let (Ok(fields), Some(t)) = (row_object(s, r), s.table(d1)) else { return false };
    t.rows.iter().any(|row| {
        fields.iter().all(|(k, v)| t.column_index(k).is_ok_and(|i| row[i].same(&Cell::from_json(v))))
    })
}

fn merge_data(a: &[String], s: &mut ExecutionState, _: &mut OfficeWorld, _: &Env) -> Result<(), ExecError> {
    let (d, d1, d2) = (arg(a, 1)?, arg(a, 2)?, arg(a, 3)?);
    let (x, y) = (table(s, d)?, table(s, d1)?);
    let mut columns = x.columns.clone();
    columns.extend(y.columns.iter().filter(|c| !x.columns.contains(c)).cloned());
    let mut out = Table::new(columns.clone());
    for t in [x, y] {
        for r in &t.rows {
            out.rows.push(columns.iter().map(|c| t.column_index(c).map(|i| r[i].clone()).unwrap_or(Cell::Null)).collect());
        }
    }
    set(s, d2, Payload::Table(out));
    Ok(())
}

fn merge_data_ok(a: &[String], s: &ExecutionState, _: &OfficeWorld) -> bool {
    let (Some(d), Some(d1), Some(d2)) = (a.get(1), a.get(2), a.get(3)) else { return false };
    match (s.table(d), s.table(d1), s.table(d2)) {
        (Some(x), Some(y), Some(z)) => z.len() == x.len() + y.len(),
        _ => false,
    }
}

/// Case-insensitive line scan of a stored file.
fn find_info(a: &[String], s: &mut ExecutionState, w: &mut OfficeWorld, _: &Env) -> Result<(), ExecError> {
    let (q, f, r) = (arg(a, 1)?, arg(a, 2)?, arg(a, 3)?);
    let needle = content(s, q)?.to_lowercase();
    let path = text(s, f)?;
    let resolved = w.resolve(&path).ok_or_else(|| ExecError::NoFile(path.clone()))?;
    let body = match &w.files[&resolved] {
        FileData::Table(t) => t.to_csv(),
        FileData::Text(t) => t.clone(),
    };
    let hits: Vec<&str> = body.lines().filter(|l| l.to_lowercase().contains(&needle)).collect();
    set(s, r, Payload::Text(hits.join("\n")));
    Ok(())
}

fn find_info_ok(a: &[String], s: &ExecutionState, _: &OfficeWorld) -> bool {
    check_text(a, 3, s)
}

fn find_info_ready(a: &[String], s: &ExecutionState, w: &OfficeWorld) -> bool {
    a.get(2).is_some_and(|f| file_exists(w, s, f))
}

fn save_data(a: &[String], s: &mut ExecutionState, w: &mut OfficeWorld, _: &Env) -> Result<(), ExecError> {
    let (d, f) = (arg(a, 1)?, arg(a, 2)?);
    let t = table(s, d)?.clone();
    let path = target_path(w, s, f)?;
    w.files.insert(path.clone(), FileData::Table(t));
    set_extra(s, f, "saved", json!(path));
    Ok(())
}

fn save_data_ok(a: &[String], s: &ExecutionState, w: &OfficeWorld) -> bool {
    let (Some(d), Some(f)) = (a.get(1), a.get(2)) else { return false };
    let Some(path) = s.get(f).and_then(|r| r.extra_str("saved")) else { return false };
    matches!((w.files.get(path), s.table(d)), (Some(FileData::Table(x)), Some(y)) if x == y)
}

/// Rows of the first file that agree with some row of the second on all
/// shared columns.
fn match_items(a: &[String], s: &mut ExecutionState, w: &mut OfficeWorld, _: &Env) -> Result<(), ExecError> {
    let (f1, f2, f3, d) = (arg(a, 1)?, arg(a, 2)?, arg(a, 3)?, arg(a, 4)?);
    let load = |f: &str| -> Result<Table, ExecError> {
        let p = text(s, f)?;
        w.table(&p).cloned().ok_or(ExecError::NoFile(p))
    };
    let (x, y) = (load(f1)?, load(f2)?);
    let out = Table { columns: x.columns.clone(), rows: x.rows.iter().filter(|r| x.contains_row_of(r, &y)).cloned().collect() };
    let path = target_path(w, s, f3)?;
    w.files.insert(path.clone(), FileData::Table(out.clone()));
    set_extra(s, f3, "saved", json!(path));
    set(s, d, Payload::Table(out));
    Ok(())
}

fn match_items_ok(a: &[String], s: &ExecutionState, w: &OfficeWorld) -> bool {
    let (Some(f3), Some(d)) = (a.get(3), a.get(4)) else { return false };
    let Some(path) = s.get(f3).and_then(|r| r.extra_str("saved")) else { return false };
    matches!((w.files.get(path), s.table(d)), (Some(FileData::Table(x)), Some(y)) if x == y)
}

fn match_items_ready(a: &[String], s: &ExecutionState, w: &OfficeWorld) -> bool {
    a.get(1).is_some_and(|f| file_exists(w, s, f)) && a.get(2).is_some_and(|f| file_exists(w, s, f))
}

// --------------------------------------------------- graphs and slides

fn create_graph(a: &[String], s: &mut ExecutionState, _: &mut OfficeWorld, _: &Env) -> Result<(), ExecError> {
    let g = arg(a, 1)?;
    let rec = record(s, g)?;
    let chart = Chart { kind: rec.ty.clone(), name: rec.display_name(g).to_string(), series: Vec::new() };
    set(s, g, Payload::Chart(chart));
    Ok(())
}

fn create_graph_ok(a: &[String], s: &ExecutionState, _: &OfficeWorld) -> bool {
    a.get(1).is_some_and(|g| matches!(s.value(g), Some(Payload::Chart(_))))
}

/// One series per column of the data table, keyed by the reference column.
fn add_to_graph(a: &[String], s: &mut ExecutionState, _: &mut OfficeWorld, _: &Env) -> Result<(), ExecError> {
    let (d, g, c, rd) = (arg(a, 1)?, arg(a, 2)?, arg(a, 3)?, arg(a, 4)?);
    let data = table(s, d)?;
    let label_column = text(s, c)?;
    let labels = table(s, rd)?.column(&label_column)?;
    if labels.len() != data.len() {
        return Err(ExecError::Invalid(format!("`{d}` has {} rows but `{rd}` has {}", data.len(), labels.len())));
    }
    let mut series = Vec::new();
    for col in data.columns.iter().filter(|c| **c != label_column) {
        series.push(Series { name: col.clone(), label_column: label_column.clone(), labels: labels.clone(), values: data.column(col)? });
    }
    if series.is_empty() {
        return Err(ExecError::Invalid(format!("`{d}` has no value columns")));
    }
    let rec = s.get_mut(g).ok_or_else(|| ExecError::Missing(g.to_string()))?;
    let Payload::Chart(chart) = &mut rec.value else { return Err(kind_err(g, "chart", &rec.value)) };
    for new in series {
        chart.series.retain(|x| x.name != new.name);
        chart.series.push(new);
    }
    Ok(())
}

fn add_to_graph_ok(a: &[String], s: &ExecutionState, _: &OfficeWorld) -> bool {
    let (Some(d), Some(g)) = (a.get(1), a.get(2)) else { return false };
    match (s.table(d), s.value(g)) {
        (Some(t), Some(Payload::Chart(chart))) => {
            !chart.series.is_empty()
                && t.columns.iter().filter(|c| chart.series.iter().all(|x| x.label_column != **c)).all(|c| {
                    chart.series.iter().any(|x| x.name == *c && x.values.len() == t.len())
                })
        }
        _ => false,
    }
}

fn create_presentation(a: &[String], s: &mut ExecutionState, _: &mut OfficeWorld, _: &Env) -> Result<(), ExecError> {
    let p = arg(a, 1)?;
    let name = record(s, p)?.display_name(p).to_string();
    set(s, p, Payload::Deck(Deck { name, slides: Vec::new(), notes: Vec::new() }));
    Ok(())
}

fn create_presentation_ok(a: &[String], s: &ExecutionState, _: &OfficeWorld) -> bool {
    a.get(1).is_some_and(|p| deck(s, p).is_some())
}

fn create_slide(a: &[String], s: &mut ExecutionState, _: &mut OfficeWorld, _: &Env) -> Result<(), ExecError> {
    let (sl, p, t) = (arg(a, 1)?, arg(a, 2)?, arg(a, 3)?);
    let title = content(s, t)?;
    let name = record(s, sl)?.display_name(sl).to_string();
    let d = deck_mut(s, p)?;
    if !d.slides.iter().any(|x| x == sl) {
        d.slides.push(sl.to_string());
    }
    let slide = Slide { name, presentation: p.to_string(), title, items: Vec::new() };
    set(s, sl, Payload::Slide(slide));
    Ok(())
}

fn create_slide_ok(a: &[String], s: &ExecutionState, _: &OfficeWorld) -> bool {
    let (Some(sl), Some(p), Some(t)) = (a.get(1), a.get(2), a.get(3)) else { return false };
    let titled = match (slide(s, sl), content(s, t)) {
        (Some(x), Ok(title)) => x.title == title,
        _ => false,
    };
    titled && deck(s, p).is_some_and(|d| d.slides.contains(sl))
}

fn push_item(s: &mut ExecutionState, sl: &str, item: SlideItem) -> Result<(), ExecError> {
    let slide = slide_mut(s, sl)?;
    slide.items.retain(|i| i.source() != item.source());
    slide.items.push(item);
    Ok(())
}

fn chart_item(s: &ExecutionState, g: &str) -> Result<SlideItem, ExecError> {
    match &record(s, g)?.value {
        Payload::Chart(c) => Ok(SlideItem::Chart { source: g.to_string(), chart: c.clone() }),
        other => Err(kind_err(g, "chart", other)),
    }
}

fn add_to_slide_basic(a: &[String], s: &mut ExecutionState, _: &mut OfficeWorld, _: &Env) -> Result<(), ExecError> {
    let (g, sl) = (arg(a, 1)?, arg(a, 2)?);
    let item = chart_item(s, g)?;
    push_item(s, sl, item)
}

fn add_to_slide_basic_ok(a: &[String], s: &ExecutionState, _: &OfficeWorld) -> bool {
    let (Some(g), Some(sl)) = (a.get(1), a.get(2)) else { return false };
    slide_has(s, sl, g)
}

fn add_to_slide(a: &[String], s: &mut ExecutionState, _: &mut OfficeWorld, _: &Env) -> Result<(), ExecError> {
    let (g, sl, dc) = (arg(a, 1)?, arg(a, 2)?, arg(a, 4)?);
    let item = chart_item(s, g)?;
    let note = SlideItem::Text { source: dc.to_string(), text: content(s, dc)? };
    push_item(s, sl, item)?;
    push_item(s, sl, note)
}

fn add_to_slide_ok(a: &[String], s: &ExecutionState, _: &OfficeWorld) -> bool {
    let (Some(g), Some(sl), Some(dc)) = (a.get(1), a.get(2), a.get(4)) else { return false };
    slide_has(s, sl, g) && slide_has(s, sl, dc)
}

fn contents_in_presentation(a: &[String], s: &mut ExecutionState, _: &mut OfficeWorld, _: &Env) -> Result<(), ExecError> {
    let (dc, p) = (arg(a, 1)?, arg(a, 3)?);
    let note = content(s, dc)?;
    let d = deck_mut(s, p)?;
    if !d.notes.contains(&note) {
        d.notes.push(note);
    }
    Ok(())
}

fn contents_in_presentation_ok(a: &[String], s: &ExecutionState, _: &OfficeWorld) -> bool {
    let (Some(dc), Some(p)) = (a.get(1), a.get(3)) else { return false };
    match (content(s, dc), deck(s, p)) {
        (Ok(note), Some(d)) => d.notes.contains(&note),
        _ => false,
    }
}

fn add_text_to_slide(a: &[String], s: &mut ExecutionState, _: &mut OfficeWorld, _: &Env) -> Result<(), ExecError> {
    let (t, sl) = (arg(a, 1)?, arg(a, 2)?);
    let item = SlideItem::Text { source: t.to_string(), text: content(s, t)? };
    push_item(s, sl, item)
}

fn add_table_to_slide(a: &[String], s: &mut ExecutionState, _: &mut OfficeWorld, _: &Env) -> Result<(), ExecError> {
    let (d, sl) = (arg(a, 1)?, arg(a, 2)?);
    let item = SlideItem::Table { source: d.to_string(), table: table(s, d)?.clone() };
    push_item(s, sl, item)
}

fn generate_presentation(a: &[String], s: &mut ExecutionState, w: &mut OfficeWorld, _: &Env) -> Result<(), ExecError> {
    let (p, f) = (arg(a, 1)?, arg(a, 2)?);
    let doc = presentation_json(s, p)?;
    let path = normalize_path(&text(s, f)?);
    if path.is_empty() {
        return Err(ExecError::Invalid(format!("`{f}` has no path")));
    }
    w.presentations.insert(path.clone(), doc);
    set_extra(s, f, "saved", json!(path));
    Ok(())
}

fn generate_presentation_ok(a: &[String], s: &ExecutionState, w: &OfficeWorld) -> bool {
    let (Some(p), Some(f)) = (a.get(1), a.get(2)) else { return false };
    let Some(path) = s.get(f).and_then(|r| r.extra_str("saved")) else { return false };
    match (w.presentations.get(path), presentation_json(s, p)) {
        (Some(stored), Ok(doc)) => *stored == doc,
        _ => false,
    }
}

// -------------------------------------------------------- appointments

fn read_appointments(a: &[String], s: &mut ExecutionState, w: &mut OfficeWorld, _: &Env) -> Result<(), ExecError> {
    let (ap, d) = (arg(a, 1)?, arg(a, 2)?);
    let t = w.calendar_table();
    set(s, ap, Payload::Table(t.clone()));
    set(s, d, Payload::Table(t));
    Ok(())
}

fn read_appointments_ok(a: &[String], s: &ExecutionState, w: &OfficeWorld) -> bool {
    a.get(2).and_then(|d| s.table(d)).is_some_and(|t| t.len() == w.calendar.len())
}

pub const WORKDAY_HOURS: std::ops::Range<i64> = 9..17;

/// Free working hours on each day that already has an appointment.
fn find_free_slots(a: &[String], s: &mut ExecutionState, w: &mut OfficeWorld, _: &Env) -> Result<(), ExecError> {
    let (ap, d) = (arg(a, 1)?, arg(a, 2)?);
    table(s, ap)?;
    let mut busy: BTreeMap<String, Vec<i64>> = BTreeMap::new();
    for x in &w.calendar {
        busy.entry(x.start.chars().take(10).collect()).or_default().push(x.hour);
    }
    let mut out = Table::new(vec!["date".into(), "hour".into()]);
    for (day, hours) in &busy {
        for h in WORKDAY_HOURS.filter(|h| !hours.contains(h)) {
            out.rows.push(vec![Cell::Text(day.clone()), Cell::Int(h)]);
        }
    }
    set(s, d, Payload::Table(out));
    Ok(())
}

fn find_free_slots_ok(a: &[String], s: &ExecutionState, _: &OfficeWorld) -> bool {
    a.get(2).and_then(|d| s.table(d)).is_some_and(|t| t.columns == ["date", "hour"])
}

fn add_to_appointments(a: &[String], s: &mut ExecutionState, w: &mut OfficeWorld, _: &Env) -> Result<(), ExecError> {
    let item = appointment_for(s, arg(a, 1)?)?;
    if !w.calendar.contains(&item) {
        w.calendar.push(item);
    }
    Ok(())
}

fn add_to_appointments_ok(a: &[String], s: &ExecutionState, w: &OfficeWorld) -> bool {
    a.get(1).and_then(|i| appointment_for(s, i).ok()).is_some_and(|x| w.calendar.contains(&x))
}

// ---------------------------------------------------------------- learning

fn learn_supervised(a: &[String], s: &mut ExecutionState, w: &mut OfficeWorld, env: &Env) -> Result<(), ExecError> {
    let (d, m, c, mo) = (arg(a, 1)?, arg(a, 2)?, arg(a, 3)?, arg(a, 4)?);
    let algorithm = text(s, m)?;
    if algorithm.trim() != DECISION_TREE {
        return Err(ExecError::Invalid(format!("unsupported algorithm `{algorithm}`")));
    }
    let target = text(s, c)?;
    let tree = DecisionTree::fit(table(s, d)?, &target, env.max_depth)?;
    let name = match text(s, mo) {
        Ok(n) if !n.trim().is_empty() => n.trim().to_string(),
        _ => mo.to_string(),
    };
    w.models.insert(name.clone(), tree);
    set(s, mo, Payload::Model(ModelInfo { name, algorithm: DECISION_TREE.into(), target }));
    Ok(())
}

fn learn_supervised_ok(a: &[String], s: &ExecutionState, w: &OfficeWorld) -> bool {
    let Some(mo) = a.get(4) else { return false };
    model_info(s, mo).is_ok_and(|m| w.models.get(&m.name).is_some_and(|t| t.target == m.target))
}

fn predict(a: &[String], s: &mut ExecutionState, w: &mut OfficeWorld, _: &Env) -> Result<(), ExecError> {
    let (d, c, mo, d1) = (arg(a, 1)?, arg(a, 2)?, arg(a, 3)?, arg(a, 4)?);
    let target = text(s, c)?;
    let info = model_info(s, mo)?;
    let tree = w.models.get(&info.name).ok_or_else(|| ExecError::NoFile(format!("model `{}`", info.name)))?;
    if tree.target != target {
        return Err(ExecError::Invalid(format!("model `{}` predicts {}, not {target}", info.name, tree.target)));
    }
    let input = table(s, d)?;
    let labels = tree.predict(input)?;
    let mut out = set_column(input, &target, &Cell::Null, &vec![false; input.len()], true)?;
    let i = out.column_index(&target)?;
    for (row, l) in out.rows.iter_mut().zip(labels) {
        row[i] = l;
    }
    set(s, d1, Payload::Table(out));
    Ok(())
}

fn predict_ok(a: &[String], s: &ExecutionState, _: &OfficeWorld) -> bool {
    let (Some(d), Some(c), Some(d1)) = (a.get(1), a.get(2), a.get(4)) else { return false };
    let (Some(input), Some(out), Ok(target)) = (s.table(d), s.table(d1), text(s, c)) else { return false };
    out.len() == input.len() && out.column(&target).is_ok_and(|v| v.iter().all(|x| *x != Cell::Null))
}

// ------------------------------------------------------- responses and mail

fn create_response(a: &[String], s: &mut ExecutionState, _: &mut OfficeWorld, _: &Env) -> Result<(), ExecError> {
    set(s, arg(a, 1)?, Payload::Contents(Vec::new()));
    Ok(())
}

fn create_response_ok(a: &[String], s: &ExecutionState, _: &OfficeWorld) -> bool {
    a.get(1).is_some_and(|r| matches!(s.value(r), Some(Payload::Contents(_))))
}

fn add_to_response(a: &[String], s: &mut ExecutionState, _: &mut OfficeWorld, _: &Env) -> Result<(), ExecError> {
    let (c, r) = (arg(a, 1)?, arg(a, 2)?);
    let text = content(s, c)?;
    let rec = s.get_mut(r).ok_or_else(|| ExecError::Missing(r.to_string()))?;
    let Payload::Contents(items) = &mut rec.value else { return Err(kind_err(r, "contents", &rec.value)) };
    items.retain(|i| i.source != c);
    items.push(ContentItem { source: c.to_string(), text });
    Ok(())
}

fn add_to_response_ok(a: &[String], s: &ExecutionState, _: &OfficeWorld) -> bool {
    let (Some(c), Some(r)) = (a.get(1), a.get(2)) else { return false };
    matches!(s.value(r), Some(Payload::Contents(items)) if items.iter().any(|i| i.source == *c))
}

fn send_response(a: &[String], s: &mut ExecutionState, w: &mut OfficeWorld, _: &Env) -> Result<(), ExecError> {
    let r = arg(a, 1)?;
    let rec = record(s, r)?;
    let items = response_items(r, &rec.value).ok_or_else(|| kind_err(r, "contents", &rec.value))?;
    w.outbox.push(json!({"kind": "response", "name": r, "contents": items}));
    Ok(())
}

/// Collected contents, or a canned reply given as plain text.
fn response_items(r: &str, value: &Payload) -> Option<Vec<ContentItem>> {
    match value {
        Payload::Contents(items) => Some(items.clone()),
        Payload::Text(text) => Some(vec![ContentItem { source: r.to_string(), text: text.clone() }]),
        _ => None,
    }
}

fn send_response_ok(a: &[String], s: &ExecutionState, w: &OfficeWorld) -> bool {
    let Some(r) = a.get(1) else { return false };
    let Some(items) = s.value(r).and_then(|v| response_items(r, v)) else { return false };
    let want = json!(items);
    outbox_has(w, |m| m.get("kind") == Some(&json!("response")) && m.get("name") == Some(&json!(r)) && m.get("contents") == Some(&want))
}

fn email_out(w: &mut OfficeWorld, to: &str, subject: &str, body: &str, extra: Option<(&str, &str)>) {
    let mut m = Map::new();
    m.insert("kind".into(), json!("email"));
    m.insert("to".into(), json!(to));
    m.insert("subject".into(), json!(subject));
    m.insert("body".into(), json!(body));
    if let Some((k, v)) = extra {
        m.insert(k.into(), json!(v));
    }
    w.outbox.push(Value::Object(m));
}

fn has_email(w: &OfficeWorld, to: &str, body: &str) -> bool {
    outbox_has(w, |m| m.get("kind") == Some(&json!("email")) && m.get("to") == Some(&json!(to)) && m.get("body") == Some(&json!(body)))
}

fn send_response_email(a: &[String], s: &mut ExecutionState, w: &mut OfficeWorld, _: &Env) -> Result<(), ExecError> {
    let (r, e) = (arg(a, 1)?, arg(a, 2)?);
    let (to, subject) = recipient(s, e)?;
    let body = content(s, r)?;
    email_out(w, &to, &subject, &body, None);
    Ok(())
}

fn send_response_email_ok(a: &[String], s: &ExecutionState, w: &OfficeWorld) -> bool {
    let (Some(r), Some(e)) = (a.get(1), a.get(2)) else { return false };
    matches!((recipient(s, e), content(s, r)), (Ok((to, _)), Ok(body)) if has_email(w, &to, &body))
}

fn notify_email(a: &[String], s: &mut ExecutionState, w: &mut OfficeWorld, _: &Env) -> Result<(), ExecError> {
    let (e, c) = (arg(a, 1)?, arg(a, 2)?);
    let (to, subject) = recipient(s, e)?;
    let body = content(s, c)?;
    email_out(w, &to, &subject, &body, None);
    Ok(())
}

fn notify_email_ok(a: &[String], s: &ExecutionState, w: &OfficeWorld) -> bool {
    let (Some(e), Some(c)) = (a.get(1), a.get(2)) else { return false };
    matches!((recipient(s, e), content(s, c)), (Ok((to, _)), Ok(body)) if has_email(w, &to, &body))
}

/// Reads an inbox email into the contents entry: the attachment the file
/// entry names when there is one, else the body. Goals carried by the
/// email are queued for the replanner.
fn read_email(a: &[String], s: &mut ExecutionState, w: &mut OfficeWorld, _: &Env) -> Result<(), ExecError> {
    let (e, c, f) = (arg(a, 1)?, arg(a, 2)?, arg(a, 3)?);
    let key = email_key(s, e)?;
    let mail = w.email(&key).cloned().ok_or_else(|| ExecError::NoFile(format!("email `{key}`")))?;
    let path = text(s, f).map(|p| normalize_path(&p)).unwrap_or_default();
    let file_name = path.rsplit('/').next().unwrap_or_default().to_string();
    let body = match mail.attachments.get(&file_name) {
        Some(att) if !path.is_empty() => {
            w.files.insert(path, FileData::Text(att.clone()));
            att.clone()
        }
        _ => mail.body.clone(),
    };
    set(s, c, Payload::Text(body));
    for (k, v) in [("id", &mail.id), ("from", &mail.from), ("subject", &mail.subject), ("body", &mail.body)] {
        set_extra(s, e, k, json!(v));
    }
    s.new_goals.extend(mail.goals.iter().cloned());
    Ok(())
}

fn read_email_ok(a: &[String], s: &ExecutionState, _: &OfficeWorld) -> bool {
    check_text(a, 2, s) && a.get(1).and_then(|e| s.get(e)).is_some_and(|r| r.extras.contains_key("from"))
}

fn read_email_ready(a: &[String], s: &ExecutionState, w: &OfficeWorld) -> bool {
    a.get(1).and_then(|e| email_key(s, e).ok()).is_some_and(|k| w.email(&k).is_some())
}

fn reply_email(a: &[String], s: &mut ExecutionState, w: &mut OfficeWorld, _: &Env) -> Result<(), ExecError> {
    let (e, c) = (arg(a, 1)?, arg(a, 2)?);
    let rec = record(s, e)?;
    let (Some(from), Some(subject), Some(id)) = (rec.extra_str("from"), rec.extra_str("subject"), rec.extra_str("id")) else {
        return Err(ExecError::Invalid(format!("email `{e}` has not been read")));
    };
    let (from, subject, id) = (from.to_string(), format!("Re: {subject}"), id.to_string());
    let body = content(s, c)?;
    email_out(w, &from, &subject, &body, Some(("in_reply_to", &id)));
    Ok(())
}

fn reply_email_ok(a: &[String], s: &ExecutionState, w: &OfficeWorld) -> bool {
    let Some(id) = a.get(1).and_then(|e| s.get(e)).and_then(|r| r.extra_str("id")) else { return false };
    outbox_has(w, |m| m.get("in_reply_to") == Some(&json!(id)))
}

fn parse_email(a: &[String], s: &mut ExecutionState, _: &mut OfficeWorld, _: &Env) -> Result<(), ExecError> {
    let e = arg(a, 1)?;
    let rec = record(s, e)?;
    let field = |k: &str| rec.extra_str(k).map(str::to_string).ok_or_else(|| ExecError::Invalid(format!("email `{e}` has not been read")));
    let parsed = json!({"from": field("from")?, "subject": field("subject")?, "body": field("body")?});
    set_extra(s, e, "parsed", parsed);
    Ok(())
}

fn parse_email_ok(a: &[String], s: &ExecutionState, _: &OfficeWorld) -> bool {
    a.get(1).and_then(|e| s.get(e)).is_some_and(|r| r.extras.get("parsed").is_some_and(Value::is_object))
}

// ------------------------------------------------------- language model

fn explain(a: &[String], s: &mut ExecutionState, _: &mut OfficeWorld, env: &Env) -> Result<(), ExecError> {
    let (c, c1) = (arg(a, 1)?, arg(a, 2)?);
    let reply = complete(env, format!("Explain: {}", content(s, c)?))?;
    set(s, c1, Payload::Text(reply));
    Ok(())
}

fn summarize(a: &[String], s: &mut ExecutionState, _: &mut OfficeWorld, env: &Env) -> Result<(), ExecError> {
    let (c, c1) = (arg(a, 1)?, arg(a, 2)?);
    let reply = complete(env, format!("Summarize: {}", content(s, c)?))?;
    set(s, c1, Payload::Text(reply));
    Ok(())
}

fn translate(a: &[String], s: &mut ExecutionState, _: &mut OfficeWorld, env: &Env) -> Result<(), ExecError> {
    let (c, l, c1) = (arg(a, 1)?, arg(a, 2)?, arg(a, 3)?);
    let reply = complete(env, format!("Translate to {}: {}", text(s, l)?, content(s, c)?))?;
    set(s, c1, Payload::Text(reply));
    Ok(())
}

fn ask_llm(a: &[String], s: &mut ExecutionState, _: &mut OfficeWorld, env: &Env) -> Result<(), ExecError> {
    let (q, r) = (arg(a, 1)?, arg(a, 2)?);
    let reply = complete(env, content(s, q)?)?;
    set(s, r, Payload::Text(reply));
    Ok(())
}

fn nonempty_text(a: &[String], i: usize, s: &ExecutionState) -> bool {
    a.get(i).and_then(|n| s.text(n)).is_some_and(|t| !t.trim().is_empty())
}

fn text_2_ok(a: &[String], s: &ExecutionState, _: &OfficeWorld) -> bool {
    nonempty_text(a, 2, s)
}

fn text_3_ok(a: &[String], s: &ExecutionState, _: &OfficeWorld) -> bool {
    nonempty_text(a, 3, s)
}

fn web_lookup(a: &[String], s: &mut ExecutionState, w: &OfficeWorld, research: bool) -> Result<(), ExecError> {
    let (q, r) = (arg(a, 1)?, arg(a, 2)?);
    let question = content(s, q)?;
    let table = if research { &w.web.research } else { &w.web.search };
    let answer = table.get(question.trim()).ok_or_else(|| ExecError::NoFile(format!("web answer for {question:?}")))?;
    set(s, r, Payload::Text(answer.clone()));
    Ok(())
}

fn search_web(a: &[String], s: &mut ExecutionState, w: &mut OfficeWorld, _: &Env) -> Result<(), ExecError> {
    web_lookup(a, s, w, false)
}

fn deep_research(a: &[String], s: &mut ExecutionState, w: &mut OfficeWorld, _: &Env) -> Result<(), ExecError> {
    web_lookup(a, s, w, true)
}

fn search_ready(a: &[String], s: &ExecutionState, w: &OfficeWorld) -> bool {
    a.get(1).and_then(|q| content(s, q).ok()).is_some_and(|q| w.web.search.contains_key(q.trim()))
}

fn research_ready(a: &[String], s: &ExecutionState, w: &OfficeWorld) -> bool {
    a.get(1).and_then(|q| content(s, q).ok()).is_some_and(|q| w.web.research.contains_key(q.trim()))
}

fn merge_answer(a: &[String], s: &mut ExecutionState, _: &mut OfficeWorld, _: &Env) -> Result<(), ExecError> {
    let (r1, r2, r) = (arg(a, 1)?, arg(a, 2)?, arg(a, 3)?);
    let merged = format!("{}\n\n{}", content(s, r1)?, content(s, r2)?);
    set(s, r, Payload::Text(merged));
    Ok(())
}

type Entry = (&'static str, ApplyFn, CheckFn, Option<CheckFn>);

fn catalog() -> Vec<Entry> {
    vec![
        ("read-data", read_data, read_data_ok, Some(read_data_ready)),
        ("connect-api", connect_api, connect_api_ok, Some(connect_api_ready)),
        ("read-pdf", read_text_file, text_in_1, Some(read_text_ready)),
        ("read-word", read_text_file, text_in_1, Some(read_text_ready)),
        ("save-pdf", save_text, save_text_ok, None),
        ("query-data", query, query_ok, None),
        ("query-data-basic", query, query_ok, None),
        ("query-data-optimized", query, query_ok, None),
        ("extract-data", extract_data, extract_data_ok, None),
        ("create-data", create_data, create_data_ok, None),
        ("delete-data", delete_data, delete_data_ok, None),
        ("modify-data", modify_data, modify_ok, None),
        ("add-value", add_value, modify_ok, None),
        ("modify-row", modify_row, modify_row_ok, None),
        ("merge-data", merge_data, merge_data_ok, None),
        ("find-info", find_info, find_info_ok, Some(find_info_ready)),
        ("save-data", save_data, save_data_ok, None),
        ("save-text", save_text, save_text_ok, None),
        ("match-items", match_items, match_items_ok, Some(match_items_ready)),
        ("create-graph", create_graph, create_graph_ok, None),
        ("add-to-graph", add_to_graph, add_to_graph_ok, None),
        ("create-presentation", create_presentation, create_presentation_ok, None),
        ("create-slide", create_slide, create_slide_ok, None),
        ("add-to-slide-basic", add_to_slide_basic, add_to_slide_basic_ok, None),
        ("add-to-slide", add_to_slide, add_to_slide_ok, None),
        ("contents-in-presentation", contents_in_presentation, contents_in_presentation_ok, None),
        ("add-text-to-slide", add_text_to_slide, add_to_slide_basic_ok, None),
        ("add-table-to-slide", add_table_to_slide, add_to_slide_basic_ok, None),
        ("generate-presentation", generate_presentation, generate_presentation_ok, None),
        ("read-appointments", read_appointments, read_appointments_ok, None),
        ("find-free-slots", find_free_slots, find_free_slots_ok, None),
        ("add-to-appointments", add_to_appointments, add_to_appointments_ok, None),
        ("learn-supervised", learn_supervised, learn_supervised_ok, None),
        ("predict-using-learned-model", predict, predict_ok, None),
        ("create-response", create_response, create_response_ok, None),
        ("add-to-response", add_to_response, add_to_response_ok, None),
        ("send-response", send_response, send_response_ok, None),
        ("send-response-email", send_response_email, send_response_email_ok, None),
        ("notify-email", notify_email, notify_email_ok, None),
        ("read-email", read_email, read_email_ok, Some(read_email_ready)),
        ("reply-email", reply_email, reply_email_ok, None),
        ("parse-email", parse_email, parse_email_ok, None),
        ("explain", explain, text_2_ok, None),
        ("translate", translate, text_3_ok, None),
        ("summarize", summarize, text_2_ok, None),
        ("ask-llm", ask_llm, text_2_ok, None),
        ("search-web", search_web, text_2_ok, Some(search_ready)),
        ("deep-research", deep_research, text_2_ok, Some(research_ready)),
        ("merge-answer", merge_answer, text_3_ok, None),
    ]
}
