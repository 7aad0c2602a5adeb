//! Entity extraction, the intent catalog and task dictionaries.

mod catalog;
mod dictionary;
mod patterns;

pub use catalog::{CatalogError, Intent, IntentCatalog, DEFAULT_CATALOG, FALLBACK_RESPONSE, UNKNOWN_INTENT};
pub use dictionary::{
    merge_task_dictionaries, validate_task_dictionary, EntityRecord, MergeError, TaskDictionary, ValidationError,
    GOALS_KEY, INIT_KEY,
};
pub use patterns::{extract_entities, EntityMap, EntityMatch, PatternError, PatternSet, DEFAULT_PATTERNS};

#[cfg(test)]
mod tests;
