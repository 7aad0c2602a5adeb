//! Assembles the instruction prompt.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::backend::REQUEST_MARKER;
use crate::intent::{EntityMap, IntentCatalog};
use crate::pddl::Domain;

/// Column layout of one system of record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSchema")]
pub struct SorSchema {
    name: String,
    columns: Vec<String>,
}

#[derive(Deserialize)]
struct RawSchema {
    name: String,
    columns: Vec<String>,
}

impl TryFrom<RawSchema> for SorSchema {
    type Error = String;

    fn try_from(raw: RawSchema) -> Result<Self, String> {
        SorSchema::new(raw.name, raw.columns)
    }
}

impl SorSchema {
    pub fn new(name: impl Into<String>, columns: Vec<String>) -> Result<Self, String> {
        let name = name.into();
        for (i, c) in columns.iter().enumerate() {
            if columns[..i].contains(c) {
                return Err(format!("schema `{name}` lists column `{c}` twice"));
            }
        }
        Ok(Self { name, columns })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }
}

pub const SECTION_TASK: &str = "## Task";
pub const SECTION_SCHEMAS: &str = "## Systems of record";
pub const SECTION_DOMAIN: &str = "## Domain";
pub const SECTION_DICTIONARY: &str = "## Output dictionary";
pub const SECTION_STATES: &str = "## States";
pub const SECTION_MERGING: &str = "## Several intents";
pub const SECTION_CONSTRAINTS: &str = "## Constraints";
pub const SECTION_EXAMPLES: &str = "## Examples";
pub const SECTION_ENTITIES: &str = "Entities detected:";

const TASK: &str = "\
You answer requests from the staff and clients of a sales and trading office. \
Each request is served by a planner that needs a precise description of the task. \
Your job is to read the request, recognise the intents it contains and describe them \
as a single dictionary.";

const SCHEMAS_NOTE: &str = "\
Querying a system of record must use its column names exactly, including upper and lower case. \
Pick the system whose columns fit the request.";

const DICTIONARY_RULES: &str = "\
Reply with one dictionary and nothing else: no functions, no code, no tool calls.
Its keys are the task entities plus the two mandatory keys 'init_state' and 'goals'.
Every key is lowercase. A key may not be a type name, and no key may appear twice.
Each entity maps to a definition dictionary with a 'type' taken from the type list above and a 'value' \
holding what the entity is at run time (a path, a query, a text, or an empty placeholder).
Entity-specific keys may be added, for example 'to', 'subject' and 'body' for emails.";

const STATE_RULES: &str = "\
'init_state' and 'goals' each hold a string of literals separated by spaces.
A literal is written (<predicate> <argument> ...) using a predicate from the list above, \
with arguments whose types match the predicate's parameters.
Every argument must be a key of the dictionary.
'init_state' lists what holds before anything is done. 'goals' lists what must hold at the end, \
written as (and ...).
A goal literal must not also appear in 'init_state'.";

const MERGE_RULE: &str = "\
When a request holds more than one intent, combine their dictionaries into one: keep every entity, \
and join all 'init_state' literals and all 'goals' literals. Use a single chat response.";

const CONSTRAINTS: &str = "\
Answer in one reply and keep the dictionary well formed.
When a query tests a value, also accept values with the same meaning (for example 'unmatched' and 'not matched').
Do not start the reply with 'Output:'.";

/// Renders the full instruction prompt. The request comes last, after
/// [`REQUEST_MARKER`].
pub fn build_prompt(
    request: &str,
    entities: &EntityMap,
    domain: &Domain,
    catalog: &IntentCatalog,
    schemas: &[SorSchema],
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{SECTION_TASK}\n{TASK}\n");

    let _ = writeln!(out, "{SECTION_SCHEMAS}");
    if schemas.is_empty() {
        out.push_str("No systems of record are available for this request.\n");
    } else {
        for (i, s) in schemas.iter().enumerate() {
            let _ = writeln!(out, "Schema for SOR {} ({}): [{}]", i + 1, s.name, s.columns.join(", "));
        }
    }
    let _ = writeln!(out, "{SCHEMAS_NOTE}\n");

    let _ = writeln!(out, "{SECTION_DOMAIN}");
    let types: Vec<&str> = domain.types.names().collect();
    let _ = writeln!(out, "Types: {}.", types.join(", "));
    out.push_str("Predicates, one per line as (<name> <variable> - <type> ...):\n");
    for p in domain.predicates.values() {
        let _ = writeln!(out, "{p}");
    }
    let actions: Vec<&str> = domain.actions.iter().map(|a| a.name.as_str()).collect();
    let _ = writeln!(out, "Actions: {}.\n", actions.join(", "));

    let _ = writeln!(out, "{SECTION_DICTIONARY}\n{DICTIONARY_RULES}\n");
    let _ = writeln!(out, "{SECTION_STATES}\n{STATE_RULES}\n");
    let _ = writeln!(out, "{SECTION_MERGING}\n{MERGE_RULE}\n");
    let _ = writeln!(out, "{SECTION_CONSTRAINTS}\n{CONSTRAINTS}\n");

    let _ = writeln!(out, "{SECTION_EXAMPLES}");
    out.push_str("Each example is written as\nIntent: <intent>\nOutput:\n<dictionary>\n\n");
    for intent in catalog.intents() {
        let _ = writeln!(out, "Intent: {}\nOutput:\n{}\n", intent.name, intent.example);
    }

    if entities.is_empty() {
        let _ = writeln!(out, "{SECTION_ENTITIES} none\n");
    } else {
        let _ = writeln!(out, "{SECTION_ENTITIES}");
        for (ty, values) in entities.grouped() {
            let _ = writeln!(out, "- {ty}: {}", values.join(", "));
        }
        out.push('\n');
    }

    let _ = write!(out, "{REQUEST_MARKER}{request}");
    out
}
