use serde_json::{json, Value};

use super::*;
use crate::pddl::{assistant_domain, Atom, Literal};

const TRADE_STATUS: &str = include_str!("../../fixtures/trade_status.json");

fn trade_status() -> Value {
    serde_json::from_str(TRADE_STATUS).unwrap()
}

fn example(name: &str) -> TaskDictionary {
    let d = assistant_domain();
    let catalog = IntentCatalog::shipped(&d);
    validate_task_dictionary(&catalog.get(name).unwrap().example, &d).unwrap()
}

#[test]
fn trade_status_dictionary_validates() {
    let t = validate_task_dictionary(&trade_status(), &assistant_domain()).unwrap();
    let keys: Vec<&str> = t.entities.keys().map(String::as_str).collect();
    assert_eq!(keys, ["data-file1", "dataframe1", "filtered-dataframe", "chat-response", "query1"]);
    assert_eq!(t.init.len(), 3);
    assert_eq!(t.goals.len(), 3);
    assert_eq!(t.entities["query1"].value, json!("df[(df[\"trade-id\"] == \"TR123\")]"));
    assert!(t.warnings.is_empty());
}

#[test]
fn empty_task_is_valid() {
    let raw = json!({"init_state": {"type": "state", "value": ""}, "goals": {"type": "state", "value": "(and)"}});
    let t = validate_task_dictionary(&raw, &assistant_domain()).unwrap();
    assert!(t.entities.is_empty() && t.init.is_empty() && t.goals.is_empty());
}

#[test]
fn uppercase_key_is_rejected() {
    let mut raw = trade_status();
    let obj = raw.as_object_mut().unwrap();
    let rec = obj.shift_remove("data-file1").unwrap();
    obj.insert("Data-File1".into(), rec);
    let err = validate_task_dictionary(&raw, &assistant_domain()).unwrap_err();
    assert!(err.violations.iter().any(|v| v == "key `Data-File1` not lowercase"), "{err}");
    // the literals that mention data-file1 now fail as well
    assert!(err.violations.iter().any(|v| v.contains("`data-file1`, which has no entity")));
}

#[test]
fn all_violations_are_reported() {
    let raw = json!({
        "dataframe": {"type": "dataframe", "value": []},
        "thing": {"type": "gizmo", "value": 1},
        "q": {"type": "query", "value": "df"},
        "r": {"type": "response"}
    });
    let err = validate_task_dictionary(&raw, &assistant_domain()).unwrap_err();
    let v = &err.violations;
    assert!(v.contains(&"key `dataframe` collides with a type name".to_string()));
    assert!(v.contains(&"entity `thing` has unknown type `gizmo`".to_string()));
    assert!(v.contains(&"entity `r` has no `value`".to_string()));
    assert!(v.contains(&"missing `init_state`".to_string()));
    assert!(v.contains(&"missing `goals`".to_string()));
    assert_eq!(v.len(), 5);
}

#[test]
fn literal_errors() {
    let d = assistant_domain();
    let raw = json!({
        "q": {"type": "query", "value": "df"},
        "init_state": "(available q) (sent q) (in q)",
        "goals": "(and (done-query q) (done-query"
    });
    let err = validate_task_dictionary(&raw, &d).unwrap_err();
    let text = err.violations.join("\n");
    assert!(text.contains("type mismatch in (sent q)"), "{text}");
    assert!(text.contains("arity mismatch for `in`"), "{text}");
    assert!(text.contains("goals: unparseable literal string"), "{text}");
}

#[test]
fn goals_already_in_init_are_kept_with_a_warning() {
    let raw = json!({
        "q": {"type": "query", "value": "df"},
        "init_state": "(available q) (done-query q)",
        "goals": "(and (done-query q))"
    });
    let t = validate_task_dictionary(&raw, &assistant_domain()).unwrap();
    assert_eq!(t.goals, vec![Literal::pos(Atom::new("done-query", ["q"]))]);
    assert_eq!(t.warnings.len(), 1);
}

#[test]
fn numeric_facts_are_validated() {
    let d = assistant_domain();
    let raw = json!({
        "db1": {"type": "database", "value": "db"},
        "init_state": "(= (database-cost db1) 1) (= (total-cost) 0)",
        "goals": "(and)"
    });
    let t = validate_task_dictionary(&raw, &d).unwrap();
    assert_eq!(t.numeric.len(), 2);
    let raw = json!({"init_state": "(= (database-cost db9) 1)", "goals": "(and)"});
    assert!(validate_task_dictionary(&raw, &d).is_err());
}

#[test]
fn wire_form_round_trips() {
    let d = assistant_domain();
    let t = validate_task_dictionary(&trade_status(), &d).unwrap();
    assert_eq!(validate_task_dictionary(&t.to_json(), &d).unwrap(), t);
}

#[test]
fn merging_one_dictionary_is_identity() {
    let t = validate_task_dictionary(&trade_status(), &assistant_domain()).unwrap();
    assert_eq!(merge_task_dictionaries(std::slice::from_ref(&t)).unwrap(), t);
}

#[test]
fn summarize_and_explain_merge() {
    let merged = merge_task_dictionaries(&[example("Summarize"), example("Explain")]).unwrap();
    assert_eq!(merged.entities.len(), 2);
    assert!(merged.goals.contains(&Literal::pos(Atom::new("summarized", ["text1", "text2"]))));
    assert!(merged.goals.contains(&Literal::pos(Atom::new("explained", ["text1", "text2"]))));
    assert_eq!(merged.init, vec![Atom::new("available", ["text1"])]);
}

#[test]
fn conflicting_entities_do_not_merge() {
    let d = assistant_domain();
    let a = validate_task_dictionary(&trade_status(), &d).unwrap();
    let mut raw = trade_status();
    raw["query1"]["value"] = json!("df[(df[\"trade-id\"] == \"TR124\")]");
    let b = validate_task_dictionary(&raw, &d).unwrap();
    assert_eq!(merge_task_dictionaries(&[a, b]), Err(MergeError::ConflictingEntity("query1".into())));
}

#[test]
fn catalog_is_complete_and_self_consistent() {
    let d = assistant_domain();
    let catalog = IntentCatalog::shipped(&d);
    let names = [
        "Read file", "Save file", "Read PDF file", "Read Word file", "Save PDF file",
        "Add a record", "Delete records", "Count", "Modify records", "Add value",
        "Send email", "Notify by email", "Generate Chart", "Create PowerPoint", "Create chart slide",
        "Create text slide", "Create table slide",
        "Explain", "Translate", "Summarize", "Deep research", "Ask LLM",
        "API access", "Data access", "Find information in file", "Find free slots", "Search web", "Match files",
        UNKNOWN_INTENT,
    ];
    assert_eq!(catalog.len(), names.len());
    for n in names {
        let intent = catalog.get(n).unwrap_or_else(|| panic!("missing intent {n}"));
        assert!(validate_task_dictionary(&intent.example, &d).is_ok(), "{n}");
    }
    let unknown = validate_task_dictionary(&catalog.get(UNKNOWN_INTENT).unwrap().example, &d).unwrap();
    assert_eq!(unknown.entities["chat-response"].value, json!(FALLBACK_RESPONSE));
}

#[test]
fn catalog_rejects_duplicates_and_bad_examples() {
    let d = assistant_domain();
    let dup = r#"[{"name": "a", "description": "", "example": {"init_state": "", "goals": "(and)"}},
                 {"name": "a", "description": "", "example": {"init_state": "", "goals": "(and)"}}]"#;
    assert!(matches!(IntentCatalog::from_json(dup, &d), Err(CatalogError::Duplicate(_))));
    let bad = r#"[{"name": "a", "description": "", "example": {"goals": "(and)"}}]"#;
    assert!(matches!(IntentCatalog::from_json(bad, &d), Err(CatalogError::InvalidExample { .. })));
}

mod merge_laws {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    /// Catalog examples with keys prefixed per example, so only exact
    /// duplicates share keys.
    fn pool() -> Vec<TaskDictionary> {
        let d = assistant_domain();
        let catalog = IntentCatalog::shipped(&d);
        catalog
            .intents()
            .iter()
            .enumerate()
            .map(|(i, intent)| {
                let mut t = validate_task_dictionary(&intent.example, &d).unwrap();
                let p = format!("i{}-", i % 5);
                let rename = |s: &String| format!("{p}{s}");
                t.entities = t.entities.iter().map(|(k, v)| (rename(k), v.clone())).collect();
                for a in &mut t.init {
                    a.args = a.args.iter().map(rename).collect();
                }
                for n in &mut t.numeric {
                    n.args = n.args.iter().map(rename).collect();
                }
                for g in &mut t.goals {
                    g.atom.args = g.atom.args.iter().map(rename).collect();
                }
                t
            })
            .collect()
    }

    type Sets = (BTreeSet<String>, BTreeSet<Atom>, BTreeSet<Literal>);

    fn as_sets(t: &TaskDictionary) -> Sets {
        (
            t.entities.iter().map(|(k, v)| format!("{k}={}", v.to_json())).collect(),
            t.init.iter().cloned().collect(),
            t.goals.iter().cloned().collect(),
        )
    }

    fn merged(ds: &[TaskDictionary]) -> Option<Sets> {
        merge_task_dictionaries(ds).ok().map(|t| as_sets(&t))
    }

    proptest! {
        #[test]
        fn associative_and_commutative(a in 0usize..29, b in 0usize..29, c in 0usize..29) {
            let pool = pool();
            let (a, b, c) = (pool[a].clone(), pool[b].clone(), pool[c].clone());
            let flat = merged(&[a.clone(), b.clone(), c.clone()]);
            let swapped = merged(&[c.clone(), a.clone(), b.clone()]);
            prop_assert_eq!(&flat, &swapped);
            let left = merge_task_dictionaries(&[a.clone(), b.clone()]).ok()
                .and_then(|ab| merged(&[ab, c.clone()]));
            let right = merge_task_dictionaries(&[b, c]).ok().and_then(|bc| merged(&[a, bc]));
            prop_assert_eq!(&flat, &left);
            prop_assert_eq!(&flat, &right);
        }
    }
}
