//! Semantic cache of redacted query templates.
//!
//! Entries hold a redacted prompt, its embedding, and the compiled request
//! with entity ids swapped for the matching placeholders. A lookup returns
//! the most similar entry at or above the threshold whose slot kinds match;
//! ties go to the newest entry. The cache is a linear scan.

mod embed;
mod redact;

use std::path::Path;

use parking_lot::RwLock;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::directory::{EntityId, EntityKind};
use crate::request::{FilterClause, QueryPlan, Scalar};
use crate::schema::SchemaName;

pub use embed::{embed, fnv1a, Embedding, DIM};
pub use redact::{locate, redact, RedactedQuery, Slot, Span};

pub const DEFAULT_THRESHOLD: f64 = 0.90;
pub const DEFAULT_CAPACITY: usize = 10_000;

/// Clause fields whose values are entity ids.
const ENTITY_FIELDS: [&str; 3] = ["nflId", "teamId", "opponentTeamId"];

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cannot embed empty text")]
    EmptyText,
    #[error("span {start}..{end} is not a valid range of the prompt")]
    BadSpan { start: usize, end: usize },
    #[error("overlapping mention spans {first:?} and {second:?}")]
    Overlap { first: (usize, usize), second: (usize, usize) },
    #[error("template has {expected} slots but {got} values were given")]
    Arity { expected: usize, got: usize },
    #[error("slot {placeholder} expects a {expected:?}, got {got:?}")]
    KindMismatch {
        placeholder: String,
        expected: EntityKind,
        got: EntityKind,
    },
    #[error("request does not carry entity {0} exactly once")]
    Template(String),
    #[error("cannot access cache file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed cache file: {0}")]
    Parse(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub redacted: RedactedQuery,
    pub embedding: Embedding,
    pub request_template: QueryPlan,
    pub schema_names: Vec<SchemaName>,
    /// Shape of the decomposition that produced the request.
    #[serde(default)]
    pub signature: String,
    pub created_at: u64,
    pub hit_count: u64,
    #[serde(default)]
    pub last_hit: u64,
}

impl CacheEntry {
    /// Substitutes `fresh` ids for the placeholders, in slot order.
    pub fn instantiate(&self, fresh: &[EntityId]) -> Result<QueryPlan, CacheError> {
        let slots = &self.redacted.slots;
        if fresh.len() != slots.len() {
            return Err(CacheError::Arity {
                expected: slots.len(),
                got: fresh.len(),
            });
        }
        for (slot, id) in slots.iter().zip(fresh) {
            if slot.kind != id.kind() {
                return Err(CacheError::KindMismatch {
                    placeholder: slot.placeholder.clone(),
                    expected: slot.kind,
                    got: id.kind(),
                });
            }
        }
        let mut plan = self.request_template.clone();
        for clause in plan.clauses_mut() {
            if let FilterClause::Term { field, value } = clause {
                if !ENTITY_FIELDS.contains(&field.as_str()) {
                    continue;
                }
                if let Scalar::Str(s) = value {
                    if let Some(i) = slots.iter().position(|slot| &slot.placeholder == s) {
                        *value = id_scalar(&fresh[i]);
                    }
                }
            }
        }
        Ok(plan.canonical())
    }
}

fn id_scalar(id: &EntityId) -> Scalar {
    match id {
        EntityId::Player(n) => Scalar::Int(*n),
        EntityId::Team(t) => Scalar::Str(t.clone()),
    }
}

/// Replaces each slot's id in the entity fields of `plan` with the slot's
/// placeholder. Every id must appear exactly once.
pub fn make_template(plan: &QueryPlan, slots: &[Slot], ids: &[EntityId]) -> Result<QueryPlan, CacheError> {
    if ids.len() != slots.len() {
        return Err(CacheError::Arity {
            expected: slots.len(),
            got: ids.len(),
        });
    }
    let mut template = plan.canonical();
    let mut uses = vec![0usize; ids.len()];
    for clause in template.clauses_mut() {
        if let FilterClause::Term { field, value } = clause {
            if !ENTITY_FIELDS.contains(&field.as_str()) {
                continue;
            }
            let hits: Vec<usize> = (0..ids.len()).filter(|&i| id_scalar(&ids[i]) == *value).collect();
            if let [i] = hits[..] {
                uses[i] += 1;
                *value = Scalar::Str(slots[i].placeholder.clone());
            } else if hits.len() > 1 {
                return Err(CacheError::Template(ids[hits[0]].to_string()));
            }
        }
    }
    if let Some(i) = uses.iter().position(|&n| n != 1) {
        return Err(CacheError::Template(ids[i].to_string()));
    }
    Ok(template)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CacheHit {
    pub entry: CacheEntry,
    pub similarity: f64,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct Inner {
    entries: Vec<CacheEntry>,
    clock: u64,
}

#[derive(Debug)]
pub struct SemanticCache {
    inner: RwLock<Inner>,
    threshold: f64,
    capacity: usize,
}

impl Default for SemanticCache {
    fn default() -> Self {
        Self::new(DEFAULT_THRESHOLD, DEFAULT_CAPACITY)
    }
}

impl SemanticCache {
    pub fn new(threshold: f64, capacity: usize) -> Self {
        Self {
            inner: RwLock::new(Inner::default()),
            threshold,
            capacity: capacity.max(1),
        }
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn len(&self) -> usize {
        self.inner.read().entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn entries(&self) -> Vec<CacheEntry> {
        self.inner.read().entries.clone()
    }

    pub fn lookup(&self, query: &RedactedQuery) -> Option<CacheHit> {
        self.lookup_filtered(query, |_| true)
    }

    /// Like [`lookup`](Self::lookup), considering only entries accepted by
    /// `accept`. A hit bumps the entry's hit count and recency.
    pub fn lookup_filtered(&self, query: &RedactedQuery, accept: impl Fn(&CacheEntry) -> bool) -> Option<CacheHit> {
        let q = embed(&query.text).ok()?;
        let kinds = query.kinds();
        let (index, similarity, created) = {
            let inner = self.inner.read();
            inner
                .entries
                .iter()
                .enumerate()
                .filter(|(_, e)| e.redacted.kinds() == kinds && accept(e))
                .map(|(i, e)| (i, q.cosine(&e.embedding), e.created_at))
                .filter(|(_, s, _)| *s >= self.threshold)
                .max_by(|a, b| a.1.total_cmp(&b.1).then(a.2.cmp(&b.2)))?
        };
        let mut inner = self.inner.write();
        inner.clock += 1;
        let now = inner.clock;
        // The entry may have moved if an insert evicted something meanwhile.
        let i = if inner.entries.get(index).is_some_and(|e| e.created_at == created) {
            index
        } else {
            inner.entries.iter().position(|e| e.created_at == created)?
        };
        let e = &mut inner.entries[i];
        e.hit_count += 1;
        e.last_hit = now;
        Some(CacheHit {
            entry: e.clone(),
            similarity,
        })
    }

    /// Adds a template, or replaces the request of an entry with the same
    /// redacted text and signature (keeping its hit count). Evicts the
    /// least recently hit entry beyond capacity.
    pub fn insert(
        &self,
        redacted: RedactedQuery,
        request_template: QueryPlan,
        schema_names: Vec<SchemaName>,
        signature: impl Into<String>,
    ) -> Result<(), CacheError> {
        let embedding = embed(&redacted.text)?;
        let signature = signature.into();
        let mut inner = self.inner.write();
        inner.clock += 1;
        let now = inner.clock;
        if let Some(e) = inner
            .entries
            .iter_mut()
            .find(|e| e.redacted.text == redacted.text && e.signature == signature)
        {
            e.redacted = redacted;
            e.request_template = request_template.canonical();
            e.schema_names = schema_names;
            return Ok(());
        }
        inner.entries.push(CacheEntry {
            redacted,
            embedding,
            request_template: request_template.canonical(),
            schema_names,
            signature,
            created_at: now,
            hit_count: 0,
            last_hit: now,
        });
        while inner.entries.len() > self.capacity {
            let victim = inner
                .entries
                .iter()
                .enumerate()
                .min_by_key(|(_, e)| (e.last_hit, e.created_at))
                .map(|(i, _)| i)
                .expect("cache is non-empty");
            inner.entries.remove(victim);
        }
        Ok(())
    }

    /// Removes the entry created at `created_at`, if present.
    pub fn invalidate(&self, created_at: u64) -> bool {
        let mut inner = self.inner.write();
        let before = inner.entries.len();
        inner.entries.retain(|e| e.created_at != created_at);
        inner.entries.len() != before
    }

    /// Writes the entries as a JSON array.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CacheError> {
        let text = serde_json::to_string(&self.inner.read().entries)?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>, threshold: f64, capacity: usize) -> Result<Self, CacheError> {
        let entries: Vec<CacheEntry> = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        let clock = entries.iter().map(|e| e.created_at.max(e.last_hit)).max().unwrap_or(0);
        let cache = Self::new(threshold, capacity);
        *cache.inner.write() = Inner { entries, clock };
        Ok(cache)
    }
}
