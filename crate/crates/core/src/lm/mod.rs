//! Language-model boundary.
//!
//! Every model role in the pipeline is a [`LmTask`] answered by an
//! [`LmBackend`]. The grammar backend is a deterministic parser over a
//! lexicon file; the remote backend speaks a JSON-over-HTTP contract:
//!
//! ```text
//! POST {"task": "DECOMPOSE", "context": {"prompt": "..."}}
//!   -> {"result": {"entities": [...], "actions": [...], "conditions": [...]}, "trace": "..."}
//! ```

mod compile;
mod grammar;
mod lexicon;
mod normalize;
mod remote;
mod rewrite;
mod summary;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::directory::{EntityId, EntityKind, EntityRole};
use crate::request::QueryPlan;
use crate::schema::{Schema, SchemaName};
use crate::session::TurnEntity;

pub use compile::{route_schemas, ActionGroup};
pub use grammar::GrammarBackend;
pub use lexicon::{ActionEntry, ConditionEntry, Lexicon, LexiconError};
pub use normalize::{Normalized, Normalizer};
pub use remote::{RemoteBackend, RemoteConfig, TOKEN_VAR, URL_VAR};
pub use rewrite::FOLLOWUP_PREFIX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum IntentLabel {
    FootballQuery,
    OutOfScope,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityMention {
    pub mention: String,
    pub kind: EntityKind,
    #[serde(default)]
    pub role: EntityRole,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolved_id: Option<EntityId>,
}

impl EntityMention {
    pub fn new(mention: impl Into<String>, kind: EntityKind, role: EntityRole) -> Self {
        Self {
            mention: mention.into(),
            kind,
            role,
            resolved_id: None,
        }
    }
}

/// Entities, actions and conditions extracted from one prompt.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Decomposition {
    pub entities: Vec<EntityMention>,
    pub actions: Vec<String>,
    pub conditions: Vec<String>,
}

impl Decomposition {
    /// Everything except entity identity: two prompts with the same shape
    /// compile to the same request up to entity ids.
    pub fn shape(&self) -> String {
        let roles: Vec<String> = self
            .entities
            .iter()
            .map(|e| format!("{:?}/{:?}", e.kind, e.role))
            .collect();
        format!(
            "entities={};actions={};conditions={}",
            roles.join(","),
            self.actions.join(","),
            self.conditions.join(",")
        )
    }
}

/// The previous answered turn, as handed to follow-up rewriting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriorTurn {
    pub prompt: String,
    pub entities: Vec<TurnEntity>,
    pub actions: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TaskKind {
    ClassifyIntent,
    Decompose,
    RouteSchema,
    Formulate,
    Repair,
    Summarize,
    RewriteFollowup,
}

impl TaskKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::ClassifyIntent => "CLASSIFY_INTENT",
            TaskKind::Decompose => "DECOMPOSE",
            TaskKind::RouteSchema => "ROUTE_SCHEMA",
            TaskKind::Formulate => "FORMULATE",
            TaskKind::Repair => "REPAIR",
            TaskKind::Summarize => "SUMMARIZE",
            TaskKind::RewriteFollowup => "REWRITE_FOLLOWUP",
        }
    }
}

/// One model call. Serializes as `{"task": KIND, "context": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", content = "context", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LmTask {
    ClassifyIntent {
        prompt: String,
        /// The session has an answered turn a fragment could refer to.
        #[serde(default)]
        followup: bool,
    },
    Decompose {
        prompt: String,
    },
    RouteSchema {
        decomposition: Decomposition,
    },
    Formulate {
        decomposition: Decomposition,
        schemas: Vec<Schema>,
    },
    Repair {
        error: String,
        failed: Option<QueryPlan>,
        decomposition: Decomposition,
        schemas: Vec<Schema>,
    },
    Summarize {
        request: QueryPlan,
        count: usize,
        decomposition: Decomposition,
    },
    RewriteFollowup {
        prompt: String,
        prior: PriorTurn,
    },
}

impl LmTask {
    pub fn kind(&self) -> TaskKind {
        match self {
            LmTask::ClassifyIntent { .. } => TaskKind::ClassifyIntent,
            LmTask::Decompose { .. } => TaskKind::Decompose,
            LmTask::RouteSchema { .. } => TaskKind::RouteSchema,
            LmTask::Formulate { .. } => TaskKind::Formulate,
            LmTask::Repair { .. } => TaskKind::Repair,
            LmTask::Summarize { .. } => TaskKind::Summarize,
            LmTask::RewriteFollowup { .. } => TaskKind::RewriteFollowup,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LmResult {
    Intent(IntentLabel),
    Decomposition(Decomposition),
    Schemas(Vec<SchemaName>),
    Request(QueryPlan),
    Text(String),
    Rewritten(String),
}

impl LmResult {
    pub fn kind_matches(&self, kind: TaskKind) -> bool {
        matches!(
            (self, kind),
            (LmResult::Intent(_), TaskKind::ClassifyIntent)
                | (LmResult::Decomposition(_), TaskKind::Decompose)
                | (LmResult::Schemas(_), TaskKind::RouteSchema)
                | (LmResult::Request(_), TaskKind::Formulate | TaskKind::Repair)
                | (LmResult::Text(_), TaskKind::Summarize)
                | (LmResult::Rewritten(_), TaskKind::RewriteFollowup)
        )
    }

    /// The `result` object of the remote wire contract.
    pub fn to_wire(&self) -> Value {
        match self {
            LmResult::Intent(l) => json!({ "label": l }),
            LmResult::Decomposition(d) => json!(d),
            LmResult::Schemas(s) => json!({ "schemas": s }),
            LmResult::Request(p) => json!({ "request": p }),
            LmResult::Text(t) => json!({ "text": t }),
            LmResult::Rewritten(p) => json!({ "prompt": p }),
        }
    }

    pub fn from_wire(kind: TaskKind, value: Value) -> Result<Self, LmError> {
        fn field<T: serde::de::DeserializeOwned>(v: &Value, key: &str) -> Result<T, LmError> {
            let inner = v
                .get(key)
                .ok_or_else(|| LmError::Malformed(format!("result is missing '{key}'")))?;
            serde_json::from_value(inner.clone())
                .map_err(|e| LmError::Malformed(format!("bad '{key}': {e}")))
        }
        Ok(match kind {
            TaskKind::ClassifyIntent => LmResult::Intent(field(&value, "label")?),
            TaskKind::Decompose => LmResult::Decomposition(
                serde_json::from_value(value)
                    .map_err(|e| LmError::Malformed(format!("bad decomposition: {e}")))?,
            ),
            TaskKind::RouteSchema => LmResult::Schemas(field(&value, "schemas")?),
            TaskKind::Formulate | TaskKind::Repair => LmResult::Request(field(&value, "request")?),
            TaskKind::Summarize => LmResult::Text(field(&value, "text")?),
            TaskKind::RewriteFollowup => LmResult::Rewritten(field(&value, "prompt")?),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmOutcome {
    pub result: LmResult,
    pub trace: String,
}

impl LmOutcome {
    pub fn new(result: LmResult, trace: impl Into<String>) -> Self {
        Self {
            result,
            trace: trace.into(),
        }
    }
}

macro_rules! unwrap_result {
    ($name:ident, $variant:ident, $ty:ty) => {
        pub fn $name(self) -> Result<$ty, LmError> {
            match self.result {
                LmResult::$variant(v) => Ok(v),
                other => Err(LmError::Malformed(format!(
                    "expected {} result, got {other:?}",
                    stringify!($variant)
                ))),
            }
        }
    };
}

impl LmOutcome {
    unwrap_result!(into_intent, Intent, IntentLabel);
    unwrap_result!(into_decomposition, Decomposition, Decomposition);
    unwrap_result!(into_schemas, Schemas, Vec<SchemaName>);
    unwrap_result!(into_request, Request, QueryPlan);
    unwrap_result!(into_text, Text, String);
    unwrap_result!(into_rewritten, Rewritten, String);
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LmError {
    #[error("language model unavailable: {0}")]
    Transport(String),
    #[error("malformed model output: {0}")]
    Malformed(String),
    #[error("{0}")]
    Formulation(String),
    #[error("no schema covers the query: {0}")]
    Routing(String),
}

impl LmError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, LmError::Transport(_))
    }
}

pub trait LmBackend: Send + Sync {
    fn name(&self) -> &str;

    fn complete(&self, task: &LmTask) -> Result<LmOutcome, LmError>;
}

/// Calls a backend and rejects outcomes whose kind does not match the task.
pub fn complete_checked(backend: &dyn LmBackend, task: &LmTask) -> Result<LmOutcome, LmError> {
    let out = backend.complete(task)?;
    if !out.result.kind_matches(task.kind()) {
        return Err(LmError::Malformed(format!(
            "{} task answered with {:?}",
            task.kind().as_str(),
            out.result
        )));
    }
    Ok(out)
}
