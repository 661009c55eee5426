//! Conversation state per session, behind a key-value persistence interface.
//!
//! [`SessionStore::with_session`] serializes access per session id: one
//! writer at a time for a session, full concurrency across sessions.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use chrono::{DateTime, TimeDelta, Utc};
use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use crate::directory::{EntityKind, EntityRole};
use crate::lm::Decomposition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseKind {
    Answer,
    Clarify,
    Reject,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnEntity {
    pub mention: String,
    pub kind: EntityKind,
    #[serde(default)]
    pub role: EntityRole,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    pub prompt: String,
    pub rewritten: String,
    pub kind: ResponseKind,
    pub request_digest: Option<String>,
    pub timestamp: DateTime<Utc>,
    #[serde(default)]
    pub entities: Vec<TurnEntity>,
    #[serde(default)]
    pub actions: Vec<String>,
}

impl Turn {
    pub fn new(prompt: impl Into<String>, kind: ResponseKind) -> Self {
        let prompt = prompt.into();
        Self {
            rewritten: prompt.clone(),
            prompt,
            kind,
            request_digest: None,
            timestamp: Utc::now(),
            entities: Vec::new(),
            actions: Vec::new(),
        }
    }
}

/// A query parked while the user picks among ambiguous candidates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuspendedQuery {
    pub prompt: String,
    pub rewritten: String,
    pub normalized: String,
    pub decomposition: Decomposition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PendingClarification {
    pub mention: String,
    pub offered: Vec<i64>,
    pub suspended: Option<SuspendedQuery>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: String,
    turns: Vec<Turn>,
    bindings: BTreeMap<String, i64>,
    pub pending_clarification: Option<PendingClarification>,
    pub last_active: DateTime<Utc>,
}

impl Session {
    pub fn new(session_id: impl Into<String>) -> Self {
        Self::new_at(session_id, Utc::now())
    }

    pub fn new_at(session_id: impl Into<String>, now: DateTime<Utc>) -> Self {
        Self {
            session_id: session_id.into(),
            turns: Vec::new(),
            bindings: BTreeMap::new(),
            pending_clarification: None,
            last_active: now,
        }
    }

    pub fn turns(&self) -> &[Turn] {
        &self.turns
    }

    pub fn bindings(&self) -> &BTreeMap<String, i64> {
        &self.bindings
    }

    /// Binding for a lowercased mention.
    pub fn binding(&self, mention_key: &str) -> Option<i64> {
        self.bindings.get(mention_key).copied()
    }

    pub(crate) fn bind(&mut self, mention_key: String, nfl_id: i64) {
        self.bindings.insert(mention_key, nfl_id);
    }

    /// Appends a turn, refreshes `last_active`, and clears a pending
    /// clarification whose mention now has a binding.
    pub fn append_turn(&mut self, turn: Turn) {
        self.last_active = self.last_active.max(turn.timestamp);
        self.turns.push(turn);
        let satisfied = self
            .pending_clarification
            .as_ref()
            .is_some_and(|p| self.bindings.contains_key(&p.mention.to_lowercase()));
        if satisfied {
            self.pending_clarification = None;
        }
    }

    pub fn last_answer(&self) -> Option<&Turn> {
        self.turns.iter().rev().find(|t| t.kind == ResponseKind::Answer)
    }

    pub fn touch(&mut self, now: DateTime<Utc>) {
        self.last_active = self.last_active.max(now);
    }
}

/// Byte-oriented key-value persistence.
pub trait KvStore: Send + Sync {
    fn get(&self, key: &str) -> Option<Vec<u8>>;
    fn put(&self, key: &str, value: Vec<u8>);
    fn delete(&self, key: &str) -> bool;
    fn scan(&self) -> Vec<String>;
}

#[derive(Debug, Default)]
pub struct MemoryKv {
    map: Mutex<HashMap<String, Vec<u8>>>,
}

impl KvStore for MemoryKv {
    fn get(&self, key: &str) -> Option<Vec<u8>> {
        self.map.lock().get(key).cloned()
    }

    fn put(&self, key: &str, value: Vec<u8>) {
        self.map.lock().insert(key.to_string(), value);
    }

    fn delete(&self, key: &str) -> bool {
        self.map.lock().remove(key).is_some()
    }

    fn scan(&self) -> Vec<String> {
        let mut keys: Vec<String> = self.map.lock().keys().cloned().collect();
        keys.sort();
        keys
    }
}

pub const DEFAULT_TTL: TimeDelta = TimeDelta::hours(24);

pub struct SessionStore {
    kv: Box<dyn KvStore>,
    locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

impl Default for SessionStore {
    fn default() -> Self {
        Self::new(Box::new(MemoryKv::default()))
    }
}

impl SessionStore {
    pub fn new(kv: Box<dyn KvStore>) -> Self {
        Self {
            kv,
            locks: Mutex::new(HashMap::new()),
        }
    }

    fn lock_for(&self, id: &str) -> Arc<Mutex<()>> {
        self.locks
            .lock()
            .entry(id.to_string())
            .or_insert_with(|| Arc::new(Mutex::new(())))
            .clone()
    }

    fn load(&self, id: &str) -> Option<Session> {
        self.kv
            .get(id)
            .and_then(|b| serde_json::from_slice(&b).ok())
    }

    fn save(&self, s: &Session) {
        let bytes = serde_json::to_vec(s).expect("session serializes");
        self.kv.put(&s.session_id, bytes);
    }

    pub fn get(&self, id: &str) -> Option<Session> {
        let lock = self.lock_for(id);
        let _g = lock.lock();
        self.load(id)
    }

    pub fn get_or_create(&self, id: &str) -> Session {
        self.with_session(id, |s| s.clone())
    }

    /// Runs `f` with exclusive access to the session, creating it if needed,
    /// and persists the result.
    pub fn with_session<R>(&self, id: &str, f: impl FnOnce(&mut Session) -> R) -> R {
        let lock = self.lock_for(id);
        let _g = lock.lock();
        let mut s = self.load(id).unwrap_or_else(|| Session::new(id));
        let out = f(&mut s);
        self.save(&s);
        out
    }

    /// Like [`Self::with_session`] but only for existing sessions.
    pub fn with_existing<R>(&self, id: &str, f: impl FnOnce(&mut Session) -> R) -> Option<R> {
        let lock = self.lock_for(id);
        let _g = lock.lock();
        let mut s = self.load(id)?;
        let out = f(&mut s);
        self.save(&s);
        Some(out)
    }

    pub fn append_turn(&self, id: &str, turn: Turn) -> Session {
        self.with_session(id, |s| {
            s.append_turn(turn);
            s.clone()
        })
    }

    /// Removes sessions idle for strictly longer than `ttl`.
    pub fn expire(&self, now: DateTime<Utc>, ttl: TimeDelta) -> usize {
        let mut evicted = 0;
        for id in self.kv.scan() {
            let lock = self.lock_for(&id);
            let _g = lock.lock();
            if let Some(s) = self.load(&id) {
                let idle = now.signed_duration_since(s.last_active);
                if idle > ttl && self.kv.delete(&id) {
                    evicted += 1;
                }
            }
        }
        evicted
    }

    pub fn len(&self) -> usize {
        self.kv.scan().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
