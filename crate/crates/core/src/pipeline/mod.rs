//! The staged workflow from prompt to answer.
//!
//! ```text
//! INTENT -> REWRITE -> DECOMPOSE -> RESOLVE -> CACHE_LOOKUP
//!        -> ROUTE_SCHEMA -> FORMULATE -> EXECUTE (REPAIR, EXECUTE)*
//!        -> SUMMARIZE -> CACHE_INSERT -> SESSION_APPEND
//! ```
//!
//! A cache hit skips routing and formulation. Execution gets at most three
//! attempts in total; each failure is handed to the backend's repair task
//! with the exact error message. A cached request that exhausts its
//! attempts is dropped from the cache and the query is formulated afresh,
//! once. Every outcome is a [`PipelineResponse`]; nothing here panics or
//! returns an error for a bad prompt.

mod trace;

use std::sync::Arc;

use parking_lot::RwLock;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cache::{self, CacheEntry, RedactedQuery, SemanticCache};
use crate::directory::{confirm_binding, BindingError, Directory, EntityId, EntityKind, PlayerEntry, ResolutionOutcome};
use crate::lm::{
    complete_checked, Decomposition, IntentLabel, LmBackend, LmError, LmTask, Lexicon, Normalizer, PriorTurn,
};
use crate::media::{MediaConfig, MediaLinks};
use crate::request::QueryPlan;
use crate::schema::{Schema, SchemaName, SchemaRegistry};
use crate::session::{PendingClarification, ResponseKind, Session, SessionStore, SuspendedQuery, Turn, TurnEntity};
use crate::store::{PlayStore, SearchResult};

pub use trace::{digest, PipelineTrace, Stage, StageRecord, TraceLog};

pub const MAX_ATTEMPTS: u32 = 3;

pub const REJECT_MESSAGE: &str =
    "Sorry, I can only help with questions about football plays and statistics. Try asking about a player, team or play type.";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub nfl_id: i64,
    pub full_name: String,
    pub position: String,
    pub team_id: String,
    pub latest_season: i64,
}

impl From<&PlayerEntry> for Candidate {
    fn from(p: &PlayerEntry) -> Self {
        Self {
            nfl_id: p.nfl_id,
            full_name: p.full_name.clone(),
            position: p.position.clone(),
            team_id: p.team_id.clone(),
            latest_season: p.latest_season(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResponseBody {
    Answer {
        text: String,
        search_request: QueryPlan,
        result: SearchResult,
        media_links: MediaLinks,
    },
    Clarify {
        question: String,
        mention: String,
        candidates: Vec<Candidate>,
    },
    Reject {
        message: String,
    },
    Fail {
        message: String,
    },
}

impl ResponseBody {
    pub fn kind(&self) -> ResponseKind {
        match self {
            ResponseBody::Answer { .. } => ResponseKind::Answer,
            ResponseBody::Clarify { .. } => ResponseKind::Clarify,
            ResponseBody::Reject { .. } => ResponseKind::Reject,
            ResponseBody::Fail { .. } => ResponseKind::Fail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineResponse {
    #[serde(flatten)]
    pub body: ResponseBody,
    pub trace: PipelineTrace,
}

impl PipelineResponse {
    pub fn kind(&self) -> ResponseKind {
        self.body.kind()
    }

    pub fn search_request(&self) -> Option<&QueryPlan> {
        match &self.body {
            ResponseBody::Answer { search_request, .. } => Some(search_request),
            _ => None,
        }
    }

    pub fn result(&self) -> Option<&SearchResult> {
        match &self.body {
            ResponseBody::Answer { result, .. } => Some(result),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClarifyError {
    #[error(transparent)]
    Binding(#[from] BindingError),
}

impl ClarifyError {
    /// 409 when nothing is pending, 422 when the id was not offered.
    pub fn status(&self) -> u16 {
        match self {
            ClarifyError::Binding(BindingError::NoPending(_)) => 409,
            ClarifyError::Binding(BindingError::NotOffered { .. }) => 422,
        }
    }
}

/// A query after decomposition, carried through resolution and beyond.
struct Parsed {
    prompt: String,
    rewritten: String,
    normalized: String,
    decomposition: Decomposition,
}

enum Attempted {
    Answered(QueryPlan, SearchResult),
    Exhausted(String),
    Unavailable(String),
}

pub struct Pipeline {
    registry: Arc<SchemaRegistry>,
    store: RwLock<Option<Arc<PlayStore>>>,
    directory: Arc<Directory>,
    normalizer: Normalizer,
    backend: Arc<dyn LmBackend>,
    cache: Arc<SemanticCache>,
    sessions: Arc<SessionStore>,
    traces: TraceLog,
    media: MediaConfig,
}

impl std::fmt::Debug for Pipeline {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Pipeline")
            .field("backend", &self.backend.name())
            .field("cache_entries", &self.cache.len())
            .field("store_ready", &self.store_ready())
            .finish()
    }
}

impl Pipeline {
    pub fn new(
        registry: Arc<SchemaRegistry>,
        directory: Arc<Directory>,
        lexicon: Arc<Lexicon>,
        backend: Arc<dyn LmBackend>,
    ) -> Self {
        Self {
            registry,
            store: RwLock::new(None),
            normalizer: Normalizer::new(directory.clone(), lexicon),
            directory,
            backend,
            cache: Arc::new(SemanticCache::default()),
            sessions: Arc::new(SessionStore::default()),
            traces: TraceLog::default(),
            media: MediaConfig::default(),
        }
    }

    pub fn with_store(self, store: Arc<PlayStore>) -> Self {
        self.set_store(store);
        self
    }

    pub fn with_cache(mut self, cache: Arc<SemanticCache>) -> Self {
        self.cache = cache;
        self
    }

    pub fn with_sessions(mut self, sessions: Arc<SessionStore>) -> Self {
        self.sessions = sessions;
        self
    }

    pub fn with_media(mut self, media: MediaConfig) -> Self {
        self.media = media;
        self
    }

    pub fn set_store(&self, store: Arc<PlayStore>) {
        *self.store.write() = Some(store);
    }

    pub fn store(&self) -> Option<Arc<PlayStore>> {
        self.store.read().clone()
    }

    pub fn store_ready(&self) -> bool {
        self.store.read().is_some()
    }

    pub fn registry(&self) -> &Arc<SchemaRegistry> {
        &self.registry
    }

    pub fn directory(&self) -> &Arc<Directory> {
        &self.directory
    }

    pub fn normalizer(&self) -> &Normalizer {
        &self.normalizer
    }

    pub fn cache(&self) -> &Arc<SemanticCache> {
        &self.cache
    }

    pub fn sessions(&self) -> &Arc<SessionStore> {
        &self.sessions
    }

    pub fn backend(&self) -> &Arc<dyn LmBackend> {
        &self.backend
    }

    pub fn media(&self) -> &MediaConfig {
        &self.media
    }

    pub fn trace(&self, id: &str) -> Option<PipelineTrace> {
        self.traces.get(id)
    }

    /// Answers one prompt in a session. Sessions are serialized; distinct
    /// sessions run in parallel.
    pub fn handle(&self, session_id: &str, prompt: &str) -> PipelineResponse {
        let mut trace = PipelineTrace::new(self.traces.next_id(), session_id);
        let body = self
            .sessions
            .with_session(session_id, |s| self.run(s, prompt, &mut trace));
        self.finish(body, trace)
    }

    /// Confirms the user's pick for a pending ambiguous name and resumes
    /// the suspended query from entity resolution.
    pub fn handle_clarification(
        &self,
        session_id: &str,
        mention: &str,
        chosen_id: i64,
    ) -> Result<PipelineResponse, ClarifyError> {
        let mut trace = PipelineTrace::new(self.traces.next_id(), session_id);
        let body = self
            .sessions
            .with_existing(session_id, |s| -> Result<ResponseBody, ClarifyError> {
                confirm_binding(s, mention, chosen_id)?;
                let suspended = s
                    .pending_clarification
                    .as_ref()
                    .and_then(|p| p.suspended.clone())
                    .ok_or_else(|| BindingError::NoPending(mention.to_string()))?;
                let parsed = Parsed {
                    prompt: suspended.prompt,
                    rewritten: suspended.rewritten,
                    normalized: suspended.normalized,
                    decomposition: suspended.decomposition,
                };
                Ok(self.resume(s, parsed, &mut trace))
            })
            .unwrap_or_else(|| Err(BindingError::NoPending(mention.to_string()).into()))?;
        Ok(self.finish(body, trace))
    }

    fn finish(&self, body: ResponseBody, trace: PipelineTrace) -> PipelineResponse {
        self.traces.put(trace.clone());
        PipelineResponse { body, trace }
    }

    fn call(&self, task: &LmTask) -> Result<crate::lm::LmOutcome, LmError> {
        complete_checked(self.backend.as_ref(), task)
    }

    fn run(&self, s: &mut Session, prompt: &str, trace: &mut PipelineTrace) -> ResponseBody {
        // A new prompt abandons any unanswered clarification.
        s.pending_clarification = None;

        let timer = trace.start(Stage::Intent, prompt);
        let label = self
            .call(&LmTask::ClassifyIntent {
                prompt: prompt.into(),
                followup: s.last_answer().is_some(),
            })
            .and_then(|o| Ok((o.trace.clone(), o.into_intent()?)));
        let (detail, label) = match label {
            Ok(v) => v,
            Err(e) => {
                timer.record(trace, &e.to_string(), "intent classification failed");
                return self.conclude(s, prompt, prompt, fail_unavailable(&e), None, trace);
            }
        };
        let label_text = format!("{label:?}");
        timer.record(trace, &label_text, detail);
        if label == IntentLabel::OutOfScope {
            let body = ResponseBody::Reject {
                message: REJECT_MESSAGE.into(),
            };
            return self.conclude(s, prompt, prompt, body, None, trace);
        }

        let mut rewritten = prompt.to_string();
        if let Some(last) = s.last_answer() {
            let prior = PriorTurn {
                prompt: last.rewritten.clone(),
                entities: last.entities.clone(),
                actions: last.actions.clone(),
            };
            let timer = trace.start(Stage::Rewrite, prompt);
            match self
                .call(&LmTask::RewriteFollowup {
                    prompt: prompt.into(),
                    prior,
                })
                .and_then(|o| Ok((o.trace.clone(), o.into_rewritten()?)))
            {
                Ok((detail, text)) => {
                    timer.record(trace, &text, detail);
                    rewritten = text;
                }
                Err(e) => {
                    timer.record(trace, prompt, format!("rewrite skipped: {e}"));
                }
            }
        }

        let normalized = self.normalizer.normalize(&rewritten).text();
        let timer = trace.start(Stage::Decompose, &normalized);
        let decomposition = match self
            .call(&LmTask::Decompose {
                prompt: normalized.clone(),
            })
            .and_then(|o| Ok((o.trace.clone(), o.into_decomposition()?)))
        {
            Ok((_, d)) if d.actions.is_empty() => {
                timer.record(trace, "", "no action found");
                let body = fail_rephrase("I could not tell which kind of play you are asking about");
                return self.conclude(s, prompt, &rewritten, body, None, trace);
            }
            Ok((detail, d)) => {
                timer.record(trace, &json(&d), detail);
                d
            }
            Err(e) => {
                timer.record(trace, &e.to_string(), "decomposition failed");
                let body = match e {
                    LmError::Transport(_) => fail_unavailable(&e),
                    other => fail_rephrase(&format!("I could not interpret that question ({other})")),
                };
                return self.conclude(s, prompt, &rewritten, body, None, trace);
            }
        };
        let parsed = Parsed {
            prompt: prompt.into(),
            rewritten,
            normalized,
            decomposition,
        };
        self.resume(s, parsed, trace)
    }

    /// Everything from entity resolution on.
    fn resume(&self, s: &mut Session, mut q: Parsed, trace: &mut PipelineTrace) -> ResponseBody {
        let timer = trace.start(Stage::Resolve, &json(&q.decomposition));
        let mut notes = Vec::new();
        for i in 0..q.decomposition.entities.len() {
            let e = &q.decomposition.entities[i];
            if e.resolved_id.is_some() {
                continue;
            }
            let outcome = match e.kind {
                EntityKind::Player => self.directory.resolve_player(&e.mention, s),
                EntityKind::Team => self.directory.resolve_team(&e.mention),
            };
            match outcome {
                ResolutionOutcome::Resolved { id } => {
                    notes.push(format!("{} -> {id}", e.mention));
                    q.decomposition.entities[i].resolved_id = Some(id);
                }
                ResolutionOutcome::Ambiguous { candidates } => {
                    let mention = e.mention.clone();
                    timer.record(trace, &mention, format!("'{mention}' matches {} players", candidates.len()));
                    s.pending_clarification = Some(PendingClarification {
                        mention: mention.clone(),
                        offered: candidates.iter().map(|c| c.nfl_id).collect(),
                        suspended: Some(SuspendedQuery {
                            prompt: q.prompt.clone(),
                            rewritten: q.rewritten.clone(),
                            normalized: q.normalized.clone(),
                            decomposition: q.decomposition.clone(),
                        }),
                    });
                    let body = ResponseBody::Clarify {
                        question: format!(
                            "I found {} players named {mention}. Which one do you mean?",
                            candidates.len()
                        ),
                        mention,
                        candidates: candidates.iter().map(Candidate::from).collect(),
                    };
                    return self.conclude(s, &q.prompt, &q.rewritten, body, None, trace);
                }
                ResolutionOutcome::NotFound => {
                    let mention = e.mention.clone();
                    timer.record(trace, &mention, format!("'{mention}' is not in the directory"));
                    let body = fail_rephrase(&format!("I could not find a player or team named '{mention}'"));
                    return self.conclude(s, &q.prompt, &q.rewritten, body, None, trace);
                }
            }
        }
        timer.record(trace, &json(&q.decomposition), notes.join("; "));

        let Some(store) = self.store() else {
            let body = ResponseBody::Fail {
                message: "The play index is not loaded yet. Please try again shortly.".into(),
            };
            return self.conclude(s, &q.prompt, &q.rewritten, body, Some(&q.decomposition), trace);
        };

        let redacted = self.redact(&q);
        let signature = q.decomposition.shape();
        let timer = trace.start(Stage::CacheLookup, redacted.as_ref().map_or("", |(r, _)| r.text.as_str()));
        let hit = redacted.as_ref().and_then(|(r, ids)| {
            let hit = self.cache.lookup_filtered(r, |e| e.signature == signature)?;
            let plan = hit.entry.instantiate(ids).ok()?;
            Some((hit, plan))
        });
        // Schemas of a freshly formulated request, to be cached once answered.
        let mut fresh = None;
        let outcome = match hit {
            Some((hit, plan)) => {
                let rec = timer.record(
                    trace,
                    &plan.canonical_json(),
                    format!("similarity {:.4} with '{}'", hit.similarity, hit.entry.redacted.text),
                );
                rec.cache_hit = true;
                let schemas = hit.entry.schema_names.clone();
                match self.attempt(&store, Ok(plan), &q.decomposition, &schemas, trace) {
                    Attempted::Exhausted(err) => {
                        self.cache.invalidate(hit.entry.created_at);
                        tracing::warn!(error = %err, "cached request failed; formulating afresh");
                        let (outcome, names) = self.formulate_and_execute(&store, &q, trace);
                        fresh = Some(names);
                        outcome
                    }
                    other => other,
                }
            }
            None => {
                timer.record(trace, "", "miss");
                let (outcome, names) = self.formulate_and_execute(&store, &q, trace);
                fresh = Some(names);
                outcome
            }
        };

        let body = match outcome {
            Attempted::Answered(plan, result) => {
                let body = self.answer(&q, plan.clone(), result, trace);
                if let (Some(names), Some(r)) = (fresh, redacted.as_ref()) {
                    self.cache_insert(&plan, names, &q.decomposition, r, trace);
                }
                body
            }
            Attempted::Exhausted(err) => fail_rephrase(&format!(
                "I could not build a valid search after {MAX_ATTEMPTS} attempts (last error: {err})"
            )),
            Attempted::Unavailable(err) => ResponseBody::Fail {
                message: format!("The language model is unavailable ({err}). Please try again."),
            },
        };
        self.conclude(s, &q.prompt, &q.rewritten, body, Some(&q.decomposition), trace)
    }

    /// The redacted normalized prompt and the entity ids in slot order, or
    /// `None` if a mention cannot be located in the text.
    fn redact(&self, q: &Parsed) -> Option<(RedactedQuery, Vec<EntityId>)> {
        let ents = &q.decomposition.entities;
        let mentions: Vec<(&str, EntityKind)> = ents.iter().map(|e| (e.mention.as_str(), e.kind)).collect();
        let spans = cache::locate(&q.normalized, &mentions)?;
        let redacted = cache::redact(&q.normalized, &spans).ok()?;
        let mut order: Vec<usize> = (0..spans.len()).collect();
        order.sort_by_key(|&i| spans[i].start);
        let ids = order
            .into_iter()
            .map(|i| ents[i].resolved_id.clone())
            .collect::<Option<Vec<_>>>()?;
        Some((redacted, ids))
    }

    fn formulate_and_execute(
        &self,
        store: &PlayStore,
        q: &Parsed,
        trace: &mut PipelineTrace,
    ) -> (Attempted, Vec<SchemaName>) {
        let d = &q.decomposition;
        let timer = trace.start(Stage::RouteSchema, &json(d));
        let names = match self
            .call(&LmTask::RouteSchema { decomposition: d.clone() })
            .and_then(|o| Ok((o.trace.clone(), o.into_schemas()?)))
        {
            Ok((detail, names)) if !names.is_empty() => {
                timer.record(trace, &json(&names), detail);
                names
            }
            Ok(_) => {
                timer.record(trace, "[]", "no schema selected");
                return (Attempted::Exhausted("no schema covers the query".into()), Vec::new());
            }
            Err(LmError::Transport(e)) => {
                timer.record(trace, &e, "routing failed");
                return (Attempted::Unavailable(e), Vec::new());
            }
            Err(e) => {
                timer.record(trace, &e.to_string(), "routing failed");
                return (Attempted::Exhausted(e.to_string()), Vec::new());
            }
        };
        let schemas = self.schemas(&names);

        let timer = trace.start(Stage::Formulate, &json(d));
        let first = match self
            .call(&LmTask::Formulate {
                decomposition: d.clone(),
                schemas,
            })
            .and_then(|o| Ok((o.trace.clone(), o.into_request()?)))
        {
            Ok((detail, plan)) => {
                timer.record(trace, &plan.canonical_json(), detail);
                Ok(plan)
            }
            Err(LmError::Transport(e)) => {
                timer.record(trace, &e, "formulation failed");
                return (Attempted::Unavailable(e), Vec::new());
            }
            Err(e) => {
                timer.record(trace, &e.to_string(), "formulation failed");
                Err(e.to_string())
            }
        };
        (self.attempt(store, first, d, &names, trace), names)
    }

    /// Stores a freshly formulated request as a template for later queries.
    fn cache_insert(
        &self,
        plan: &QueryPlan,
        names: Vec<SchemaName>,
        d: &Decomposition,
        redacted: &(RedactedQuery, Vec<EntityId>),
        trace: &mut PipelineTrace,
    ) {
        let (r, ids) = redacted;
        let timer = trace.start(Stage::CacheInsert, &r.text);
        let note = match cache::make_template(plan, &r.slots, ids)
            .and_then(|t| self.cache.insert(r.clone(), t, names, d.shape()))
        {
            Ok(()) => "stored template".to_string(),
            Err(e) => format!("not cached: {e}"),
        };
        timer.record(trace, &note, note.clone());
    }

    fn schemas(&self, names: &[SchemaName]) -> Vec<Schema> {
        names.iter().filter_map(|n| self.registry.get(*n).cloned()).collect()
    }

    /// Executes `first`, repairing after each failure, for at most
    /// [`MAX_ATTEMPTS`] executions in total.
    fn attempt(
        &self,
        store: &PlayStore,
        first: Result<QueryPlan, String>,
        d: &Decomposition,
        names: &[SchemaName],
        trace: &mut PipelineTrace,
    ) -> Attempted {
        let mut current = first;
        let mut failed: Option<QueryPlan> = None;
        for attempt in 1..=MAX_ATTEMPTS {
            let error = match current {
                Ok(plan) => {
                    let timer = trace.start(Stage::Execute, &plan.canonical_json());
                    match store.execute_plan(&plan) {
                        Ok(result) => {
                            let rec = timer.record(trace, &json(&result), format!("{} plays", result.count));
                            rec.attempts = attempt;
                            return Attempted::Answered(plan.canonical(), result);
                        }
                        Err(e) => {
                            let rec = timer.record(trace, &e.message, e.message.clone());
                            rec.attempts = attempt;
                            failed = Some(plan);
                            e.message
                        }
                    }
                }
                Err(msg) => {
                    let rec = trace.start(Stage::Execute, "").record(trace, &msg, format!("no request: {msg}"));
                    rec.attempts = attempt;
                    msg
                }
            };
            if attempt == MAX_ATTEMPTS {
                return Attempted::Exhausted(error);
            }
            let timer = trace.start(Stage::Repair, &error);
            current = match self
                .call(&LmTask::Repair {
                    error: error.clone(),
                    failed: failed.clone(),
                    decomposition: d.clone(),
                    schemas: self.schemas(names),
                })
                .and_then(|o| Ok((o.trace.clone(), o.into_request()?)))
            {
                Ok((detail, plan)) => {
                    let rec = timer.record(trace, &plan.canonical_json(), detail);
                    rec.attempts = attempt + 1;
                    Ok(plan)
                }
                Err(LmError::Transport(e)) => {
                    timer.record(trace, &e, "repair failed");
                    return Attempted::Unavailable(e);
                }
                Err(e) => {
                    let rec = timer.record(trace, &e.to_string(), "repair failed");
                    rec.attempts = attempt + 1;
                    Err(e.to_string())
                }
            };
        }
        unreachable!("the loop returns on its last attempt")
    }

    fn answer(&self, q: &Parsed, plan: QueryPlan, result: SearchResult, trace: &mut PipelineTrace) -> ResponseBody {
        let timer = trace.start(Stage::Summarize, &plan.canonical_json());
        let text = match self
            .call(&LmTask::Summarize {
                request: plan.clone(),
                count: result.count,
                decomposition: q.decomposition.clone(),
            })
            .and_then(|o| Ok((o.trace.clone(), o.into_text()?)))
        {
            Ok((detail, text)) => {
                timer.record(trace, &text, detail);
                text
            }
            Err(e) => {
                let text = match result.count {
                    1 => "Found 1 play.".to_string(),
                    n => format!("Found {n} plays."),
                };
                timer.record(trace, &text, format!("fallback summary: {e}"));
                text
            }
        };
        ResponseBody::Answer {
            text,
            media_links: self.media.links(&result.play_ids),
            search_request: plan,
            result,
        }
    }

    /// Records the turn and closes the trace.
    fn conclude(
        &self,
        s: &mut Session,
        prompt: &str,
        rewritten: &str,
        body: ResponseBody,
        d: Option<&Decomposition>,
        trace: &mut PipelineTrace,
    ) -> ResponseBody {
        let timer = trace.start(Stage::SessionAppend, prompt);
        let mut turn = Turn::new(prompt, body.kind());
        turn.rewritten = rewritten.to_string();
        if let ResponseBody::Answer { search_request, .. } = &body {
            turn.request_digest = Some(digest(&search_request.canonical_json()));
        }
        if let Some(d) = d {
            turn.entities = d
                .entities
                .iter()
                .map(|e| TurnEntity {
                    mention: e.mention.clone(),
                    kind: e.kind,
                    role: e.role,
                })
                .collect();
            turn.actions = d.actions.clone();
        }
        s.append_turn(turn);
        timer.record(trace, &format!("{:?}", body.kind()), format!("{} turns", s.turns().len()));
        body
    }

    /// Entries currently cached (for inspection and snapshots).
    pub fn cache_entries(&self) -> Vec<CacheEntry> {
        self.cache.entries()
    }
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).unwrap_or_default()
}

fn fail_rephrase(reason: &str) -> ResponseBody {
    ResponseBody::Fail {
        message: format!("{reason}. Could you rephrase your question?"),
    }
}

fn fail_unavailable(e: &LmError) -> ResponseBody {
    ResponseBody::Fail {
        message: format!("{e}. Please try again."),
    }
}
