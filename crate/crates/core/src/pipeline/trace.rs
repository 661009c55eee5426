//! Per-request stage records and a bounded log of recent traces.

use std::collections::{HashMap, VecDeque};
use std::time::Instant;

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Stage {
    Intent,
    Rewrite,
    Decompose,
    Resolve,
    CacheLookup,
    RouteSchema,
    Formulate,
    Execute,
    Repair,
    Summarize,
    CacheInsert,
    SessionAppend,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Intent => "INTENT",
            Stage::Rewrite => "REWRITE",
            Stage::Decompose => "DECOMPOSE",
            Stage::Resolve => "RESOLVE",
            Stage::CacheLookup => "CACHE_LOOKUP",
            Stage::RouteSchema => "ROUTE_SCHEMA",
            Stage::Formulate => "FORMULATE",
            Stage::Execute => "EXECUTE",
            Stage::Repair => "REPAIR",
            Stage::Summarize => "SUMMARIZE",
            Stage::CacheInsert => "CACHE_INSERT",
            Stage::SessionAppend => "SESSION_APPEND",
        }
    }
}

/// First 16 hex digits of the SHA-256 of `text`.
pub fn digest(text: &str) -> String {
    let hash = Sha256::digest(text.as_bytes());
    hex::encode(&hash[..8])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: Stage,
    pub input_digest: String,
    pub output_digest: String,
    pub duration_us: u64,
    pub cache_hit: bool,
    pub attempts: u32,
    /// The backend's explanation or a short outcome note.
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineTrace {
    pub trace_id: String,
    pub session_id: String,
    pub stages: Vec<StageRecord>,
}

impl PipelineTrace {
    pub fn new(trace_id: impl Into<String>, session_id: impl Into<String>) -> Self {
        Self {
            trace_id: trace_id.into(),
            session_id: session_id.into(),
            stages: Vec::new(),
        }
    }

    pub fn stage_names(&self) -> Vec<Stage> {
        self.stages.iter().map(|s| s.stage).collect()
    }

    pub fn has(&self, stage: Stage) -> bool {
        self.stages.iter().any(|s| s.stage == stage)
    }

    /// Whether the answered request came from the cache.
    pub fn cache_hit(&self) -> bool {
        self.stages.iter().any(|s| s.stage == Stage::CacheLookup && s.cache_hit) && !self.has(Stage::Formulate)
    }

    /// Highest attempt number reached by execution.
    pub fn attempts(&self) -> u32 {
        self.stages
            .iter()
            .filter(|s| s.stage == Stage::Execute)
            .map(|s| s.attempts)
            .max()
            .unwrap_or(0)
    }

    /// Starts timing a stage; finish it with [`Timer::record`].
    pub fn start(&self, stage: Stage, input: &str) -> Timer {
        Timer {
            stage,
            input_digest: digest(input),
            started: Instant::now(),
        }
    }
}

pub struct Timer {
    stage: Stage,
    input_digest: String,
    started: Instant,
}

impl Timer {
    pub fn record<'t>(self, trace: &'t mut PipelineTrace, output: &str, detail: impl Into<String>) -> &'t mut StageRecord {
        trace.stages.push(StageRecord {
            stage: self.stage,
            input_digest: self.input_digest,
            output_digest: digest(output),
            duration_us: self.started.elapsed().as_micros() as u64,
            cache_hit: false,
            attempts: 0,
            detail: detail.into(),
        });
        trace.stages.last_mut().expect("just pushed")
    }
}

/// Recent traces by id, plus the latest trace id of each session.
#[derive(Debug)]
pub struct TraceLog {
    capacity: usize,
    inner: Mutex<LogInner>,
}

#[derive(Debug, Default)]
struct LogInner {
    by_id: HashMap<String, PipelineTrace>,
    order: VecDeque<String>,
    latest: HashMap<String, String>,
    counter: u64,
}

impl Default for TraceLog {
    fn default() -> Self {
        Self::new(1000)
    }
}

impl TraceLog {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity: capacity.max(1),
            inner: Mutex::new(LogInner::default()),
        }
    }

    pub fn next_id(&self) -> String {
        let mut inner = self.inner.lock();
        inner.counter += 1;
        format!("t{:08}", inner.counter)
    }

    pub fn put(&self, trace: PipelineTrace) {
        let mut inner = self.inner.lock();
        inner.latest.insert(trace.session_id.clone(), trace.trace_id.clone());
        inner.order.push_back(trace.trace_id.clone());
        inner.by_id.insert(trace.trace_id.clone(), trace);
        while inner.order.len() > self.capacity {
            if let Some(old) = inner.order.pop_front() {
                inner.by_id.remove(&old);
            }
        }
    }

    /// Looks up a trace id, or else the latest trace of a session id.
    pub fn get(&self, id: &str) -> Option<PipelineTrace> {
        let inner = self.inner.lock();
        inner
            .by_id
            .get(id)
            .or_else(|| inner.latest.get(id).and_then(|t| inner.by_id.get(t)))
            .cloned()
    }
}
