//! Accuracy evaluation over natural-language QA pairs.
//!
//! A pair is correct when the pipeline answers with a request whose
//! canonical JSON equals the expected one and whose count matches.

mod report;
pub mod suite;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pipeline::{Pipeline, Stage};
use crate::request::QueryPlan;
use crate::session::ResponseKind;

pub use report::{EvalReport, PairResult, StageLatency, StratumScore};
pub use suite::{build_specs, build_suite, inject_paraphrases, pair_for, QuestionSpec, SuiteConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Complexity {
    Easy,
    Medium,
    Difficult,
}

impl Complexity {
    pub const ALL: [Complexity; 3] = [Complexity::Easy, Complexity::Medium, Complexity::Difficult];

    pub fn as_str(self) -> &'static str {
        match self {
            Complexity::Easy => "EASY",
            Complexity::Medium => "MEDIUM",
            Complexity::Difficult => "DIFFICULT",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QAPair {
    pub query: String,
    pub expected_request: QueryPlan,
    pub expected_count: usize,
    pub complexity: Complexity,
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("suite generation failed: {0}")]
    Generation(String),
    #[error("oracles disagree on '{query}': plan counts {plan}, predicate counts {native}")]
    OracleMismatch { query: String, plan: usize, native: usize },
    #[error("no play store is loaded")]
    NoStore,
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed QA file: {0}")]
    Parse(#[from] serde_json::Error),
}

pub fn load_pairs(path: impl AsRef<Path>) -> Result<Vec<QAPair>, EvalError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| EvalError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}

pub fn save_pairs(path: impl AsRef<Path>, pairs: &[QAPair]) -> Result<(), EvalError> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(pairs)?;
    std::fs::write(path, text + "\n").map_err(|source| EvalError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// How one response compares with its pair; correct needs both matches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Judgement {
    pub match_filters: bool,
    pub match_count: bool,
    pub reason: String,
}

impl Judgement {
    pub fn correct(&self) -> bool {
        self.match_filters && self.match_count
    }
}

/// Scores one response against its pair.
pub fn judge(pair: &QAPair, kind: ResponseKind, request: Option<&QueryPlan>, count: Option<usize>) -> Judgement {
    let match_filters = kind == ResponseKind::Answer
        && request.is_some_and(|r| r.canonical_json() == pair.expected_request.canonical_json());
    let match_count = kind == ResponseKind::Answer && count == Some(pair.expected_count);
    let reason = if kind != ResponseKind::Answer {
        format!("response was {kind:?}")
    } else if !match_filters {
        format!("request differs: {}", request.map(QueryPlan::canonical_json).unwrap_or_default())
    } else if !match_count {
        format!("count {} != {}", count.unwrap_or(0), pair.expected_count)
    } else {
        String::new()
    };
    Judgement {
        match_filters,
        match_count,
        reason,
    }
}

/// Runs every pair through the pipeline, each in a fresh session.
pub fn run(pipeline: &Pipeline, pairs: &[QAPair]) -> Result<EvalReport, EvalError> {
    if !pipeline.store_ready() {
        return Err(EvalError::NoStore);
    }
    let mut results = Vec::with_capacity(pairs.len());
    let mut durations: BTreeMap<Stage, Vec<u64>> = BTreeMap::new();
    let mut hits = 0usize;
    for (i, pair) in pairs.iter().enumerate() {
        let session = format!("eval-{i:05}");
        let response = pipeline.handle(&session, &pair.query);
        for s in &response.trace.stages {
            durations.entry(s.stage).or_default().push(s.duration_us);
        }
        if response.trace.cache_hit() {
            hits += 1;
        }
        let kind = response.kind();
        let count = response.result().map(|r| r.count);
        let j = judge(pair, kind, response.search_request(), count);
        results.push(PairResult {
            query: pair.query.clone(),
            complexity: pair.complexity,
            expected_count: pair.expected_count,
            actual_count: count,
            kind,
            match_filters: j.match_filters,
            match_count: j.match_count,
            correct: j.correct(),
            reason: j.reason,
        });
    }
    Ok(EvalReport::new(results, hits, &durations))
}
