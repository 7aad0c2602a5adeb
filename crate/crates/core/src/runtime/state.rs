//! Low-level execution state: one record per problem object.

use indexmap::IndexMap;
use serde::Serialize;
use serde_json::{Map, Value};

use super::table::{Cell, Table};
use crate::intent::TaskDictionary;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub name: String,
    /// Name of the column the labels come from.
    pub label_column: String,
    pub labels: Vec<Cell>,
    pub values: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Chart {
    /// Object type, such as `bar-chart`.
    pub kind: String,
    pub name: String,
    pub series: Vec<Series>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SlideItem {
    Chart { source: String, chart: Chart },
    Text { source: String, text: String },
    Table { source: String, table: Table },
}

impl SlideItem {
    pub fn source(&self) -> &str {
        match self {
            SlideItem::Chart { source, .. } | SlideItem::Text { source, .. } | SlideItem::Table { source, .. } => source,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Slide {
    pub name: String,
    pub presentation: String,
    pub title: String,
    pub items: Vec<SlideItem>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Deck {
    pub name: String,
    /// State keys of the slides, in order.
    pub slides: Vec<String>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelInfo {
    /// Key in the world's model store.
    pub name: String,
    pub algorithm: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContentItem {
    pub source: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum Payload {
    Empty,
    Text(String),
    Number(f64),
    Json(Value),
    Table(Table),
    Chart(Chart),
    Slide(Slide),
    Deck(Deck),
    Model(ModelInfo),
    Contents(Vec<ContentItem>),
}

impl Payload {
    /// Seed value for a dictionary entity. Strings stay text, empty
    /// lists and nulls are empty, numbers are numbers.
    pub fn from_json(v: &Value) -> Payload {
        match v {
            Value::Null => Payload::Empty,
            Value::Array(a) if a.is_empty() => Payload::Empty,
            Value::String(s) => Payload::Text(s.clone()),
            Value::Number(n) => Payload::Number(n.as_f64().unwrap_or(0.0)),
            other => Payload::Json(other.clone()),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Payload::Empty => "empty",
            Payload::Text(_) => "text",
            Payload::Number(_) => "number",
            Payload::Json(_) => "json",
            Payload::Table(_) => "table",
            Payload::Chart(_) => "chart",
            Payload::Slide(_) => "slide",
            Payload::Deck(_) => "deck",
            Payload::Model(_) => "model",
            Payload::Contents(_) => "contents",
        }
    }

    /// Plain-text rendering used in responses and emails.
    pub fn render(&self) -> String {
        match self {
            Payload::Empty => String::new(),
            Payload::Text(s) => s.clone(),
            Payload::Number(n) if n.fract() == 0.0 && n.abs() < 1e15 => format!("{}", *n as i64),
            Payload::Number(n) => n.to_string(),
            Payload::Json(v) => v.to_string(),
            Payload::Table(t) => t.to_csv().trim_end().to_string(),
            Payload::Chart(c) => format!("{} `{}` with {} series", c.kind, c.name, c.series.len()),
            Payload::Slide(s) => format!("slide `{}` titled {:?} with {} items", s.name, s.title, s.items.len()),
            Payload::Deck(d) => format!("presentation `{}` with {} slides", d.name, d.slides.len()),
            Payload::Model(m) => format!("{} model `{}` trained on {}", m.algorithm, m.name, m.target),
            Payload::Contents(items) => items.iter().map(|i| i.text.as_str()).collect::<Vec<_>>().join("\n\n"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    #[serde(rename = "type")]
    pub ty: String,
    pub value: Payload,
    pub extras: Map<String, Value>,
}

impl Record {
    pub fn new(ty: impl Into<String>, value: Payload) -> Self {
        Self { ty: ty.into(), value, extras: Map::new() }
    }

    pub fn extra_str(&self, key: &str) -> Option<&str> {
        self.extras.get(key).and_then(Value::as_str)
    }

    /// Display name: the `name` extra when present.
    pub fn display_name<'a>(&'a self, key: &'a str) -> &'a str {
        self.extra_str("name").unwrap_or(key)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ExecutionState {
    pub entries: IndexMap<String, Record>,
    /// Goal literals injected by executors; drained when the runner replans.
    pub new_goals: Vec<String>,
}

impl ExecutionState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_dictionary(task: &TaskDictionary) -> Self {
        let entries = task
            .entities
            .iter()
            .map(|(k, r)| {
                let rec = Record { ty: r.ty.clone(), value: Payload::from_json(&r.value), extras: r.extras.clone() };
                (k.clone(), rec)
            })
            .collect();
        Self { entries, new_goals: Vec::new() }
    }

    pub fn get(&self, name: &str) -> Option<&Record> {
        self.entries.get(name)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Record> {
        self.entries.get_mut(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    /// Sets the value of `name`, creating an untyped record if needed.
    pub fn set(&mut self, name: &str, value: Payload) {
        match self.entries.get_mut(name) {
            Some(r) => r.value = value,
            None => {
                self.entries.insert(name.to_string(), Record::new("object", value));
            }
        }
    }

    pub fn insert(&mut self, name: &str, record: Record) {
        self.entries.insert(name.to_string(), record);
    }

    pub fn value(&self, name: &str) -> Option<&Payload> {
        self.entries.get(name).map(|r| &r.value)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        match self.value(name)? {
            Payload::Table(t) => Some(t),
            _ => None,
        }
    }

    pub fn text(&self, name: &str) -> Option<&str> {
        match self.value(name)? {
            Payload::Text(t) => Some(t),
            _ => None,
        }
    }
}
