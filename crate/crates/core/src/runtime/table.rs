//! In-memory tables with CSV input and output.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Float(f) => Some(*f),
            _ => None,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Cell::Int(_) | Cell::Float(_))
    }

    /// Numbers compare across Int and Float; other kinds only with their own.
    pub fn compare(&self, other: &Cell) -> Option<Ordering> {
        match (self, other) {
            (Cell::Text(a), Cell::Text(b)) => Some(a.cmp(b)),
            (Cell::Bool(a), Cell::Bool(b)) => Some(a.cmp(b)),
            (Cell::Null, Cell::Null) => Some(Ordering::Equal),
            (a, b) => a.as_f64()?.partial_cmp(&b.as_f64()?),
        }
    }

    pub fn same(&self, other: &Cell) -> bool {
        self.compare(other) == Some(Ordering::Equal)
    }

    /// Reads free text the way a CSV cell would be read.
    pub fn parse(text: &str) -> Cell {
        let t = text.trim();
        if t.is_empty() {
            Cell::Null
        } else if let Ok(i) = t.parse() {
            Cell::Int(i)
        } else if let Ok(f) = t.parse() {
            Cell::Float(f)
        } else if let Some(b) = parse_bool(t) {
            Cell::Bool(b)
        } else {
            Cell::Text(text.to_string())
        }
    }

    /// Value from a JSON scalar, as found in task dictionaries.
    pub fn from_json(v: &serde_json::Value) -> Cell {
        match v {
            serde_json::Value::Null => Cell::Null,
            serde_json::Value::Bool(b) => Cell::Bool(*b),
            serde_json::Value::Number(n) => n.as_i64().map(Cell::Int).unwrap_or_else(|| Cell::Float(n.as_f64().unwrap_or(0.0))),
            serde_json::Value::String(s) => Cell::Text(s.clone()),
            other => Cell::Text(other.to_string()),
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Null => Ok(()),
            Cell::Bool(b) => write!(f, "{}", if *b { "True" } else { "False" }),
            Cell::Int(i) => write!(f, "{i}"),
            Cell::Float(x) => write!(f, "{x:?}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TableError {
    #[error("csv: {0}")]
    Csv(String),
    #[error("no column `{0}`")]
    NoColumn(String),
    #[error("row {row} has {found} cells, expected {expected}")]
    Width { row: usize, found: usize, expected: usize },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Int,
    Float,
    Bool,
    Text,
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" | "True" | "TRUE" => Some(true),
        "false" | "False" | "FALSE" => Some(false),
        _ => None,
    }
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<(), TableError> {
        if row.len() != self.columns.len() {
            return Err(TableError::Width { row: self.rows.len() + 1, found: row.len(), expected: self.columns.len() });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Result<usize, TableError> {
        self.columns.iter().position(|c| c == name).ok_or_else(|| TableError::NoColumn(name.to_string()))
    }

    pub fn column(&self, name: &str) -> Result<Vec<Cell>, TableError> {
        let i = self.column_index(name)?;
        Ok(self.rows.iter().map(|r| r[i].clone()).collect())
    }

    pub fn cell(&self, row: usize, column: &str) -> Option<&Cell> {
        let i = self.column_index(column).ok()?;
        self.rows.get(row).map(|r| &r[i])
    }

    /// Parses CSV with a header row. Each column gets one type: integer,
    /// float, boolean or text, the first that fits every non-empty cell.
    /// Empty cells become [`Cell::Null`].
    pub fn from_csv(text: &str) -> Result<Table, TableError> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let columns: Vec<String> =
            reader.headers().map_err(|e| TableError::Csv(e.to_string()))?.iter().map(|h| h.trim().to_string()).collect();
        let mut raw: Vec<Vec<String>> = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| TableError::Csv(e.to_string()))?;
            raw.push(rec.iter().map(str::to_string).collect());
        }
        let kinds: Vec<Kind> = (0..columns.len())
            .map(|c| {
                let vals: Vec<&str> = raw.iter().map(|r| r[c].trim()).filter(|v| !v.is_empty()).collect();
                if vals.iter().all(|v| v.parse::<i64>().is_ok()) {
                    Kind::Int
                } else if vals.iter().all(|v| v.parse::<f64>().is_ok()) {
                    Kind::Float
                } else if vals.iter().all(|v| parse_bool(v).is_some()) {
                    Kind::Bool
                } else {
                    Kind::Text
                }
            })
            .collect();
        let rows = raw
            .into_iter()
            .map(|r| {
                r.iter()
                    .zip(&kinds)
                    .map(|(v, k)| {
                        let t = v.trim();
                        if t.is_empty() && *k != Kind::Text {
                            return Cell::Null;
                        }
                        match k {
                            Kind::Int => Cell::Int(t.parse().unwrap()),
                            Kind::Float => Cell::Float(t.parse().unwrap()),
                            Kind::Bool => Cell::Bool(parse_bool(t).unwrap()),
                            Kind::Text if v.is_empty() => Cell::Null,
                            Kind::Text => Cell::Text(v.clone()),
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(Table { columns, rows })
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        // writing to memory cannot fail
        w.write_record(&self.columns).unwrap();
        for r in &self.rows {
            w.write_record(r.iter().map(ToString::to_string)).unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }

    /// Rows whose cells all equal some row of `other` on the shared columns.
    pub fn contains_row_of(&self, row: &[Cell], other: &Table) -> bool {
        let shared: Vec<(usize, usize)> = self
            .columns
            .iter()
            .enumerate()
            .filter_map(|(i, c)| other.columns.iter().position(|o| o == c).map(|j| (i, j)))
            .collect();
        !shared.is_empty() && other.rows.iter().any(|o| shared.iter().all(|&(i, j)| row[i].same(&o[j])))
    }
}
