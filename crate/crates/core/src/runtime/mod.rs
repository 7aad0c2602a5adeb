//! Plan execution against a simulated office.

mod exec;
mod executors;
mod query;
mod response;
mod state;
mod table;
mod tree;
mod world;

pub use exec::{
    execute_plan, execute_plan_with, replan, Aborted, Elapsed, ExecutionReport, Hooks, ReplanHook, ReplanPolicy,
    ReplanRecord, ReplanRequest, RuntimeError, Session, Status, StepHook, StepRecord, Trigger, DEFAULT_REPLAN_BUDGET,
};
pub use executors::{Env, ExecError, Executor, Registry, DECISION_TREE, PRESENTATION_FORMAT, WORKDAY_HOURS};
pub use query::{parse_query, CmpOp, Expr, Query, QueryError, Selector};
pub use response::build_response;
pub use state::{Chart, ContentItem, Deck, ExecutionState, ModelInfo, Payload, Record, Series, Slide, SlideItem};
pub use table::{Cell, Table, TableError};
pub use tree::{DecisionTree, Node, Split, TreeError, DEFAULT_MAX_DEPTH};
pub use world::{
    normalize_path, Appointment, Email, FileData, OfficeWorld, WebFixtures, WorldError, APIS_DIR, APPOINTMENTS_FILE,
    APPOINTMENT_COLUMNS, INBOX_FILE, MODELS_DIR, OUTBOX_FILE, WEB_FILE,
};
