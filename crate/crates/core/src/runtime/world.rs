//! The simulated office: files, mail, calendar, presentations and models.
//!
//! On disk a world is a directory:
//!
//! | path                     | contents                                        |
//! |--------------------------|-------------------------------------------------|
//! | `**/*.csv`               | tables                                          |
//! | `**/*.txt`               | text; `x.pdf.txt` is the payload of `x.pdf`     |
//! | `**/*.pptx`              | presentations as JSON containers                |
//! | `appointments.json`      | calendar rows                                   |
//! | `inbox.json`             | incoming emails                                 |
//! | `outbox.jsonl`           | sent emails and responses, one per line         |
//! | `web.json`               | canned `search` and `research` answers by query |
//! | `apis/<name>.csv`        | tables served by `connect-api`                  |
//! | `models/<name>.json`     | decision tree dumps                             |

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::table::{Cell, Table, TableError};
use super::tree::DecisionTree;

pub const APPOINTMENTS_FILE: &str = "appointments.json";
pub const INBOX_FILE: &str = "inbox.json";
pub const OUTBOX_FILE: &str = "outbox.jsonl";
pub const WEB_FILE: &str = "web.json";
pub const APIS_DIR: &str = "apis";
pub const MODELS_DIR: &str = "models";
pub const PRESENTATION_EXT: &str = "pptx";

#[derive(Debug, thiserror::Error)]
pub enum WorldError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub enum FileData {
    Table(Table),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Appointment {
    pub subject: String,
    /// ISO-8601 start time.
    pub start: String,
    pub hour: i64,
    pub year: i64,
    pub isrecurring: bool,
}

pub const APPOINTMENT_COLUMNS: [&str; 5] = ["subject", "start", "hour", "year", "isrecurring"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Email {
    pub id: String,
    pub from: String,
    pub subject: String,
    pub body: String,
    /// Attachment file name to text payload.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub attachments: BTreeMap<String, String>,
    /// Goal literals that reading this email adds to the task.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub goals: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WebFixtures {
    #[serde(default)]
    pub search: BTreeMap<String, String>,
    #[serde(default)]
    pub research: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OfficeWorld {
    pub files: BTreeMap<String, FileData>,
    pub calendar: Vec<Appointment>,
    pub inbox: Vec<Email>,
    pub outbox: Vec<Value>,
    pub presentations: BTreeMap<String, Value>,
    pub models: BTreeMap<String, DecisionTree>,
    pub apis: BTreeMap<String, Table>,
    pub web: WebFixtures,
}

/// Forward slashes, no empty, `.` or `..` components.
pub fn normalize_path(path: &str) -> String {
    path.replace('\\', "/").split('/').filter(|c| !c.is_empty() && *c != "." && *c != "..").collect::<Vec<_>>().join("/")
}

fn basename(path: &str) -> &str {
    path.rsplit('/').next().unwrap_or(path)
}

fn stem(path: &str) -> &str {
    let b = basename(path);
    b.split_once('.').map(|(s, _)| s).unwrap_or(b)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> WorldError + '_ {
    move |source| WorldError::Io { path: path.to_path_buf(), source }
}

fn format_err(path: &Path, message: impl ToString) -> WorldError {
    WorldError::Format { path: path.to_path_buf(), message: message.to_string() }
}

fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), WorldError> {
    let mut entries: Vec<PathBuf> =
        fs::read_dir(dir).map_err(io_err(dir))?.map(|e| e.map(|e| e.path())).collect::<Result<_, _>>().map_err(io_err(dir))?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            walk(&p, out)?;
        } else {
            out.push(p);
        }
    }
    Ok(())
}

fn write(path: &Path, contents: &str) -> Result<(), WorldError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    fs::write(path, contents).map_err(io_err(path))
}

fn pretty(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("world values serialize");
    s.push('\n');
    s
}

impl OfficeWorld {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_table(mut self, path: &str, table: Table) -> Self {
        self.files.insert(normalize_path(path), FileData::Table(table));
        self
    }

    pub fn with_text(mut self, path: &str, text: impl Into<String>) -> Self {
        self.files.insert(normalize_path(path), FileData::Text(text.into()));
        self
    }

    /// Finds the stored file a data-file or database value names: the exact
    /// path, then the path with `.csv` appended, then the only file whose
    /// base name or stem matches.
    pub fn resolve(&self, name: &str) -> Option<String> {
        let p = normalize_path(name);
        if self.files.contains_key(&p) {
            return Some(p);
        }
        let csv = format!("{p}.csv");
        if self.files.contains_key(&csv) {
            return Some(csv);
        }
        let want = basename(&p);
        let hits: Vec<&String> =
            self.files.keys().filter(|k| basename(k) == want || stem(k) == want).collect();
        match hits.as_slice() {
            [one] => Some((*one).clone()),
            _ => None,
        }
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        match self.files.get(&self.resolve(name)?) {
            Some(FileData::Table(t)) => Some(t),
            _ => None,
        }
    }

    pub fn text(&self, name: &str) -> Option<&str> {
        match self.files.get(&self.resolve(name)?) {
            Some(FileData::Text(t)) => Some(t),
            _ => None,
        }
    }

    pub fn remove_file(&mut self, name: &str) -> Option<FileData> {
        let p = self.resolve(name)?;
        self.files.remove(&p)
    }

    pub fn calendar_table(&self) -> Table {
        let mut t = Table::new(APPOINTMENT_COLUMNS.iter().map(|c| c.to_string()).collect());
        for a in &self.calendar {
            t.rows.push(vec![
                Cell::Text(a.subject.clone()),
                Cell::Text(a.start.clone()),
                Cell::Int(a.hour),
                Cell::Int(a.year),
                Cell::Bool(a.isrecurring),
            ]);
        }
        t
    }

    pub fn email(&self, key: &str) -> Option<&Email> {
        self.inbox.iter().find(|e| e.id == key).or_else(|| self.inbox.iter().find(|e| e.subject == key))
    }

    /// Every artifact path, for diffing worlds before and after a run.
    pub fn artifact_paths(&self) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        for (p, f) in &self.files {
            let body = match f {
                FileData::Table(t) => t.to_csv(),
                FileData::Text(t) => t.clone(),
            };
            out.insert(p.clone(), body);
        }
        for (p, v) in &self.presentations {
            out.insert(p.clone(), v.to_string());
        }
        for (n, m) in &self.models {
            out.insert(format!("{MODELS_DIR}/{n}.json"), serde_json::to_string(m).unwrap_or_default());
        }
        out
    }

    pub fn load(dir: &Path) -> Result<Self, WorldError> {
        let mut world = Self::new();
        let mut paths = Vec::new();
        walk(dir, &mut paths)?;
        for path in paths {
            let rel = path.strip_prefix(dir).unwrap_or(&path).to_string_lossy().replace('\\', "/");
            let text = fs::read_to_string(&path).map_err(io_err(&path))?;
            let json = |t: &str| serde_json::from_str::<Value>(t).map_err(|e| format_err(&path, e));
            match rel.as_str() {
                APPOINTMENTS_FILE => {
                    world.calendar = serde_json::from_str(&text).map_err(|e| format_err(&path, e))?;
                }
                INBOX_FILE => world.inbox = serde_json::from_str(&text).map_err(|e| format_err(&path, e))?,
                WEB_FILE => world.web = serde_json::from_str(&text).map_err(|e| format_err(&path, e))?,
                OUTBOX_FILE => {
                    for line in text.lines().filter(|l| !l.trim().is_empty()) {
                        world.outbox.push(json(line)?);
                    }
                }
                _ => {
                    let table = |t: &str| Table::from_csv(t).map_err(|e: TableError| format_err(&path, e));
                    let sub = |d: &str| rel.strip_prefix(&format!("{d}/")).map(str::to_string);
                    if let Some(name) = sub(APIS_DIR).and_then(|n| n.strip_suffix(".csv").map(str::to_string)) {
                        world.apis.insert(name, table(&text)?);
                    } else if let Some(name) = sub(MODELS_DIR).and_then(|n| n.strip_suffix(".json").map(str::to_string)) {
                        let tree = serde_json::from_str(&text).map_err(|e| format_err(&path, e))?;
                        world.models.insert(name, tree);
                    } else if rel.ends_with(".csv") {
                        world.files.insert(rel.clone(), FileData::Table(table(&text)?));
                    } else if rel.ends_with(&format!(".{PRESENTATION_EXT}")) {
                        world.presentations.insert(rel.clone(), json(&text)?);
                    } else {
                        let key = match rel.strip_suffix(".txt") {
                            Some(inner) if basename(inner).contains('.') => inner.to_string(),
                            _ => rel.clone(),
                        };
                        world.files.insert(key, FileData::Text(text));
                    }
                }
            }
        }
        Ok(world)
    }

    /// Writes the world under `dir`, the layout [`OfficeWorld::load`] reads.
    pub fn save(&self, dir: &Path) -> Result<(), WorldError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        for (p, f) in &self.files {
            match f {
                FileData::Table(t) => write(&dir.join(p), &t.to_csv())?,
                FileData::Text(t) if p.ends_with(".txt") => write(&dir.join(p), t)?,
                FileData::Text(t) => write(&dir.join(format!("{p}.txt")), t)?,
            }
        }
        for (p, v) in &self.presentations {
            write(&dir.join(p), &pretty(v))?;
        }
        for (n, m) in &self.models {
            write(&dir.join(MODELS_DIR).join(format!("{n}.json")), &pretty(m))?;
        }
        for (n, t) in &self.apis {
            write(&dir.join(APIS_DIR).join(format!("{n}.csv")), &t.to_csv())?;
        }
        if !self.calendar.is_empty() {
            write(&dir.join(APPOINTMENTS_FILE), &pretty(&self.calendar))?;
        }
        if !self.inbox.is_empty() {
            write(&dir.join(INBOX_FILE), &pretty(&self.inbox))?;
        }
        if self.web != WebFixtures::default() {
            write(&dir.join(WEB_FILE), &pretty(&self.web))?;
        }
        if !self.outbox.is_empty() {
            let lines: String = self.outbox.iter().map(|v| format!("{v}\n")).collect();
            write(&dir.join(OUTBOX_FILE), &lines)?;
        }
        Ok(())
    }

    pub fn snapshot(&self) -> OfficeWorld {
        self.clone()
    }

    pub fn restore(&mut self, snapshot: OfficeWorld) {
        *self = snapshot;
    }
}
