//! Configuration and the request pipeline behind the `plan-x` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use planx_core::compiler::{compile_problem, CompileError};
use planx_core::intent::{
    extract_entities, validate_task_dictionary, CatalogError, IntentCatalog, PatternError, PatternSet, TaskDictionary,
    ValidationError, FALLBACK_RESPONSE, UNKNOWN_INTENT,
};
use planx_core::pddl::{assistant_domain, parse_domain, render_problem, Domain, PddlError};
use planx_core::planner::{ground, plan_with, GroundError, Plan, PlanError, SearchOptions};
use planx_core::prompt::{
    build_prompt, complete, parse_llm_output, BackendError, CompletionBackend, HttpBackend, JsonError, ScriptedBackend,
    SorSchema,
};
use planx_core::runtime::{
    build_response, execute_plan, ExecutionReport, ExecutionState, OfficeWorld, Registry, ReplanPolicy, RuntimeError,
    Session, Status, WorldError, DEFAULT_REPLAN_BUDGET,
};
use serde::Deserialize;
use serde_json::{Map, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_UNSOLVABLE: i32 = 3;
pub const EXIT_ABORTED: i32 = 4;
pub const EXIT_BACKEND: i32 = 5;

pub const DEFAULT_HTTP_TIMEOUT_MS: u64 = 30_000;

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BackendConfig {
    Scripted {
        /// JSON map from request (or its fingerprint) to reply text.
        replies: Option<PathBuf>,
    },
    Http {
        endpoint: String,
        #[serde(default = "default_timeout")]
        timeout_ms: u64,
        /// Passed through in the request body, e.g. `model` or `temperature`.
        #[serde(default)]
        params: Map<String, Value>,
    },
}

fn default_timeout() -> u64 {
    DEFAULT_HTTP_TIMEOUT_MS
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig::Scripted { replies: None }
    }
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct DumpConfig {
    pub dir: Option<PathBuf>,
    /// Print the compiled problem to stdout.
    pub problem: bool,
    /// Print the plan to stdout.
    pub plan: bool,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SchemaConfig {
    pub name: String,
    pub columns: Vec<String>,
}

/// The on-disk configuration. Relative paths are taken from the directory
/// of the config file. Missing files fall back to the shipped assets.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub domain: Option<PathBuf>,
    pub intents: Option<PathBuf>,
    pub patterns: Option<PathBuf>,
    pub schemas: Vec<SchemaConfig>,
    pub backend: BackendConfig,
    pub world: Option<PathBuf>,
    pub replan_budget: usize,
    pub node_cap: usize,
    pub dump: DumpConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            domain: None,
            intents: None,
            patterns: None,
            schemas: Vec::new(),
            backend: BackendConfig::default(),
            world: None,
            replan_budget: DEFAULT_REPLAN_BUDGET,
            node_cap: SearchOptions::default().node_cap,
            dump: DumpConfig::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config {path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("domain {path}: {source}")]
    Domain { path: PathBuf, source: PddlError },
    #[error("intent catalog: {0}")]
    Catalog(#[from] CatalogError),
    #[error("patterns: {0}")]
    Patterns(#[from] PatternError),
    #[error("schema: {0}")]
    Schema(String),
    #[error("backend: {0}")]
    Backend(#[from] BackendError),
    #[error("world: {0}")]
    World(#[from] WorldError),
    #[error("node_cap must be positive")]
    NodeCap,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        let mut config: Config =
            serde_json::from_str(&text).map_err(|source| ConfigError::Json { path: path.into(), source })?;
        config.rebase(path.parent().unwrap_or(Path::new(".")));
        Ok(config)
    }

    /// Makes every relative path relative to `base`.
    pub fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(x) = p.as_mut() {
                if x.is_relative() {
                    *x = base.join(&*x);
                }
            }
        };
        fix(&mut self.domain);
        fix(&mut self.intents);
        fix(&mut self.patterns);
        fix(&mut self.world);
        fix(&mut self.dump.dir);
        if let BackendConfig::Scripted { replies } = &mut self.backend {
            fix(replies);
        }
    }
}

/// A validated configuration, ready to serve requests.
pub struct App {
    pub domain: Domain,
    pub catalog: IntentCatalog,
    pub patterns: PatternSet,
    pub schemas: Vec<SorSchema>,
    pub backend: Arc<dyn CompletionBackend>,
    pub registry: Registry,
    pub policy: ReplanPolicy,
    pub dump: DumpConfig,
}

fn read(path: &Path) -> Result<String, ConfigError> {
    fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })
}

impl App {
    pub fn new(config: &Config) -> Result<Self, ConfigError> {
        let domain = match &config.domain {
            Some(p) => parse_domain(&read(p)?).map_err(|source| ConfigError::Domain { path: p.clone(), source })?,
            None => assistant_domain(),
        };
        let catalog = match &config.intents {
            Some(p) => IntentCatalog::from_json(&read(p)?, &domain)?,
            None => IntentCatalog::shipped(&domain),
        };
        let patterns = match &config.patterns {
            Some(p) => PatternSet::from_json(&read(p)?)?,
            None => PatternSet::shipped(),
        };
        let schemas = config
            .schemas
            .iter()
            .map(|s| SorSchema::new(s.name.clone(), s.columns.clone()))
            .collect::<Result<_, _>>()
            .map_err(ConfigError::Schema)?;
        let backend: Arc<dyn CompletionBackend> = match &config.backend {
            BackendConfig::Scripted { replies: Some(p) } => Arc::new(ScriptedBackend::load(p)?),
            BackendConfig::Scripted { replies: None } => Arc::new(ScriptedBackend::new()),
            BackendConfig::Http { endpoint, timeout_ms, params } => {
                Arc::new(HttpBackend::new(endpoint.clone(), Duration::from_millis(*timeout_ms)).with_params(params.clone()))
            }
        };
        if config.node_cap == 0 {
            return Err(ConfigError::NodeCap);
        }
        if let Some(w) = &config.world {
            OfficeWorld::load(w)?;
        }
        let search = SearchOptions { node_cap: config.node_cap, ..SearchOptions::default() };
        Ok(Self {
            domain,
            catalog,
            patterns,
            schemas,
            backend,
            registry: Registry::builtin(),
            policy: ReplanPolicy { budget: config.replan_budget, search },
            dump: config.dump.clone(),
        })
    }
}

/// A failure, tagged with the pipeline stage that produced it.
#[derive(Debug, thiserror::Error)]
pub enum StageError {
    #[error("backend: {0}")]
    Backend(#[from] BackendError),
    #[error("parse: {0}")]
    Parse(#[from] JsonError),
    #[error("validation: {0}")]
    Validation(#[from] ValidationError),
    #[error("compile: {0}")]
    Compile(#[from] CompileError),
    #[error("ground: {0}")]
    Ground(#[from] GroundError),
    #[error("planner: {0}")]
    Planner(#[from] PlanError),
    #[error("runtime: {0}")]
    Runtime(#[from] RuntimeError),
    #[error("dump: {0}")]
    Dump(#[from] std::io::Error),
}

impl StageError {
    pub fn stage(&self) -> &'static str {
        match self {
            StageError::Backend(_) => "backend",
            StageError::Parse(_) => "parse",
            StageError::Validation(_) => "validation",
            StageError::Compile(_) => "compile",
            StageError::Ground(_) => "ground",
            StageError::Planner(_) => "planner",
            StageError::Runtime(_) => "runtime",
            StageError::Dump(_) => "dump",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            StageError::Backend(_) => EXIT_BACKEND,
            StageError::Parse(_) | StageError::Validation(_) | StageError::Compile(_) | StageError::Ground(_) => {
                EXIT_VALIDATION
            }
            StageError::Planner(_) => EXIT_UNSOLVABLE,
            StageError::Runtime(_) => EXIT_ABORTED,
            StageError::Dump(_) => 1,
        }
    }

    /// What the user is told. A reply that cannot be turned into a task
    /// gets the unknown-intent answer.
    pub fn response(&self) -> String {
        match self {
            StageError::Parse(_) | StageError::Validation(_) => FALLBACK_RESPONSE.to_string(),
            other => other.to_string(),
        }
    }
}

/// What the pipeline hands in to the planning half.
pub enum Input<'a> {
    /// Natural language, sent through entity extraction and the backend.
    Request(&'a str),
    /// A raw task dictionary, bypassing the language model.
    Seeded(&'a Value),
}

#[derive(Debug)]
pub struct Outcome {
    pub response: String,
    pub report: ExecutionReport,
    pub problem: String,
    pub plan: String,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        match self.report.status {
            Status::Success => EXIT_OK,
            Status::Failed | Status::Aborted => EXIT_ABORTED,
        }
    }
}

fn dump(dir: Option<&Path>, name: &str, contents: &str) -> Result<(), StageError> {
    if let Some(dir) = dir {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(name), contents)?;
    }
    Ok(())
}

fn pretty(v: &impl serde::Serialize) -> String {
    // plain data, serialization cannot fail
    serde_json::to_string_pretty(v).unwrap() + "\n"
}

/// The unknown-intent dictionary answers with a canned reply of its own.
fn canned_reply(dict: &TaskDictionary, app: &App) -> Option<String> {
    let unknown = app.catalog.get(UNKNOWN_INTENT)?;
    let example = validate_task_dictionary(&unknown.example, &app.domain).ok()?;
    (dict.entities == example.entities && dict.goals == example.goals).then(|| FALLBACK_RESPONSE.to_string())
}

/// Runs one request end to end against `world`. With `dump_dir`, every
/// intermediate artifact is written there as it is produced.
pub fn handle_request(
    input: Input<'_>,
    app: &App,
    world: &mut OfficeWorld,
    dump_dir: Option<&Path>,
) -> Result<Outcome, StageError> {
    let raw = match input {
        Input::Request(request) => {
            let entities = extract_entities(request, &app.patterns);
            let prompt = build_prompt(request, &entities, &app.domain, &app.catalog, &app.schemas);
            dump(dump_dir, "prompt.txt", &prompt)?;
            let reply = complete(&prompt, app.backend.as_ref())?;
            dump(dump_dir, "reply.txt", &reply)?;
            parse_llm_output(&reply)?
        }
        Input::Seeded(v) => v.clone(),
    };
    let dict = validate_task_dictionary(&raw, &app.domain)?;
    dump(dump_dir, "dictionary.json", &pretty(&dict.to_json()))?;
    let problem = compile_problem(&dict, &app.domain, "request")?;
    let problem_text = render_problem(&problem);
    dump(dump_dir, "problem.pddl", &problem_text)?;
    let task = ground(&app.domain, &problem)?;
    let plan: Plan = plan_with(&task, app.policy.search)?;
    let plan_text = plan.to_text();
    dump(dump_dir, "plan.txt", &plan_text)?;

    let mut session = Session::new(&app.domain, &app.registry);
    session.env.llm = Some(app.backend.clone());
    session.policy = app.policy.clone();
    let mut state = ExecutionState::from_dictionary(&dict);
    let report = execute_plan(&session, &problem, &plan, &mut state, world)?;
    dump(dump_dir, "report.json", &pretty(&report))?;
    let response = match canned_reply(&dict, app) {
        Some(text) if report.status == Status::Success => text,
        _ => build_response(&report),
    };
    dump(dump_dir, "response.txt", &response)?;
    Ok(Outcome { response, report, problem: problem_text, plan: plan_text })
}

/// Response text and exit code for a request, whatever the outcome.
pub fn respond(input: Input<'_>, app: &App, world: &mut OfficeWorld, dump_dir: Option<&Path>) -> (String, i32) {
    match handle_request(input, app, world, dump_dir) {
        Ok(o) => {
            let code = o.exit_code();
            (o.response, code)
        }
        Err(e) => (e.response(), e.exit_code()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn config_defaults_and_rebase() {
        let mut c: Config = serde_json::from_str(r#"{"backend": {"kind": "scripted", "replies": "r.json"}, "world": "/abs"}"#).unwrap();
        assert_eq!(c.replan_budget, DEFAULT_REPLAN_BUDGET);
        assert_eq!(c.node_cap, SearchOptions::default().node_cap);
        c.rebase(Path::new("/etc/planx"));
        assert_eq!(c.backend, BackendConfig::Scripted { replies: Some("/etc/planx/r.json".into()) });
        assert_eq!(c.world, Some(PathBuf::from("/abs")));
    }

    #[test]
    fn config_rejects_unknown_fields() {
        assert!(serde_json::from_str::<Config>(r#"{"bakend": {}}"#).is_err());
        assert!(serde_json::from_str::<Config>(r#"{"backend": {"kind": "smoke"}}"#).is_err());
        let http: Config = serde_json::from_str(r#"{"backend": {"kind": "http", "endpoint": "http://x"}}"#).unwrap();
        assert!(matches!(http.backend, BackendConfig::Http { timeout_ms: DEFAULT_HTTP_TIMEOUT_MS, .. }));
    }

    #[test]
    fn startup_validates_referenced_files() {
        let c = Config { domain: Some("/nonexistent/domain.pddl".into()), ..Config::default() };
        assert!(matches!(App::new(&c), Err(ConfigError::Io { .. })));
        let c = Config { node_cap: 0, ..Config::default() };
        assert!(matches!(App::new(&c), Err(ConfigError::NodeCap)));
        let c = Config { schemas: vec![SchemaConfig { name: "s".into(), columns: vec!["a".into(), "a".into()] }], ..Config::default() };
        assert!(matches!(App::new(&c), Err(ConfigError::Schema(_))));
    }

    #[test]
    fn every_error_names_its_stage() {
        let app = App::new(&Config::default()).unwrap();
        let mut world = OfficeWorld::new();
        let e = handle_request(Input::Request("anything"), &app, &mut world, None).unwrap_err();
        assert_eq!(e.stage(), "backend");
        assert_eq!(e.exit_code(), EXIT_BACKEND);
        assert!(e.to_string().starts_with("backend: "));

        let e = handle_request(Input::Seeded(&json!({"goals": "(and)"})), &app, &mut world, None).unwrap_err();
        assert_eq!(e.stage(), "validation");
        assert_eq!(e.exit_code(), EXIT_VALIDATION);
        assert_eq!(e.response(), FALLBACK_RESPONSE);

        let unsolvable = json!({
            "dataframe1": {"type": "dataframe", "value": []},
            "init_state": "",
            "goals": "(and (database-backed dataframe1))"
        });
        let e = handle_request(Input::Seeded(&unsolvable), &app, &mut world, None).unwrap_err();
        assert_eq!(e.stage(), "planner");
        assert_eq!(e.exit_code(), EXIT_UNSOLVABLE);
        assert!(e.response().contains("(database-backed dataframe1)"), "{}", e.response());
    }

    #[test]
    fn satisfied_request_succeeds_without_steps() {
        let app = App::new(&Config::default()).unwrap();
        let done = json!({
            "chat-response": {"type": "response", "value": []},
            "init_state": "(available chat-response)",
            "goals": "(and (available chat-response))"
        });
        let o = handle_request(Input::Seeded(&done), &app, &mut OfficeWorld::new(), None).unwrap();
        assert_eq!(o.exit_code(), EXIT_OK);
        assert!(o.response.starts_with("Task completed in 0 steps."));
    }
}
