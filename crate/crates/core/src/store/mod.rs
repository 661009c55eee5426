//! In-memory play index.
//!
//! Every schema gets a table of rows (plays, or play/defender pairs for the
//! defense schema). Each field of the table is indexed: equality fields by a
//! value→rows posting map, range fields by a value-sorted array. Execution
//! intersects per-clause row sets, projects rows to plays, and intersects
//! across the requests of a plan.

pub mod bindings;
mod record;
pub mod synth;

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::request::{check_consistency, FilterClause, QueryPlan, Scalar, SearchRequest};
use crate::schema::{validate_filter, FieldKind, SchemaName, SchemaRegistry};

pub use bindings::{FieldValue, Row};
pub use synth::generate_synthetic;
pub use record::{
    read_ndjson, write_ndjson, Alignment, Direction, Formation, PlayRecord, PlayType, SeasonType,
};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read dataset: {0}")]
    Io(#[source] std::io::Error),
    #[error("malformed record on line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("duplicate play_id '{0}'")]
    Duplicate(String),
    #[error("invalid record '{play_id}': field '{field}': {reason}")]
    Invalid {
        play_id: String,
        field: String,
        reason: String,
    },
    #[error("schema '{schema}' field '{field}' has no record binding")]
    Unbound { schema: SchemaName, field: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecErrorCode {
    EmptyPlan,
    UnknownSchema,
    UnknownField,
    IllegalClause,
    InconsistentRequest,
}

/// A request the executor refuses. `message` is what the repair step reads.
#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
#[error("{message}")]
pub struct ExecError {
    pub code: ExecErrorCode,
    pub schema: Option<SchemaName>,
    pub field: Option<String>,
    pub suggestion: Option<String>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchResult {
    pub play_ids: Vec<String>,
    pub count: usize,
}

impl SearchResult {
    pub fn empty() -> Self {
        Self {
            play_ids: Vec::new(),
            count: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum TermKey {
    Int(i64),
    Float(u64),
    Str(String),
}

impl TermKey {
    fn number(v: f64) -> Self {
        if v.fract() == 0.0 && v.abs() < 9.0e15 {
            TermKey::Int(v as i64)
        } else {
            TermKey::Float((v + 0.0).to_bits())
        }
    }

    fn of_value(v: FieldValue<'_>) -> Self {
        match v {
            FieldValue::Int(i) => TermKey::Int(i),
            FieldValue::Float(f) => TermKey::number(f),
            FieldValue::Str(s) => TermKey::Str(s.to_string()),
        }
    }

    fn of_scalar(s: &Scalar) -> Self {
        match s {
            Scalar::Int(i) => TermKey::Int(*i),
            Scalar::Float(f) => TermKey::number(*f),
            Scalar::Str(s) => TermKey::Str(s.clone()),
        }
    }
}

#[derive(Debug)]
enum FieldIndex {
    Terms(HashMap<TermKey, Vec<u32>>),
    Sorted(Vec<(f64, u32)>),
}

#[derive(Debug)]
struct Table {
    /// Row id → play index.
    row_play: Vec<u32>,
    fields: HashMap<String, FieldIndex>,
}

impl Table {
    fn build(schema: SchemaName, registry: &SchemaRegistry, plays: &[PlayRecord]) -> Result<Self, IngestError> {
        let spec = registry.get(schema).expect("schema present");
        let mut row_play = Vec::new();
        let mut rows = Vec::new();
        for (pi, p) in plays.iter().enumerate() {
            for r in bindings::rows_of(schema, p) {
                row_play.push(pi as u32);
                rows.push(r);
            }
        }
        let mut fields = HashMap::new();
        for f in &spec.fields {
            if !bindings::is_bound(schema, &f.key) {
                return Err(IngestError::Unbound {
                    schema,
                    field: f.key.clone(),
                });
            }
            let values = rows.iter().enumerate().filter_map(|(ri, r)| {
                bindings::lookup(schema, &f.key, *r)
                    .ok()
                    .flatten()
                    .map(|v| (ri as u32, v))
            });
            let index = if f.kind == FieldKind::Range {
                let mut sorted: Vec<(f64, u32)> =
                    values.filter_map(|(ri, v)| v.as_f64().map(|x| (x, ri))).collect();
                sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                FieldIndex::Sorted(sorted)
            } else {
                let mut postings: HashMap<TermKey, Vec<u32>> = HashMap::new();
                for (ri, v) in values {
                    postings.entry(TermKey::of_value(v)).or_default().push(ri);
                }
                FieldIndex::Terms(postings)
            };
            fields.insert(f.key.clone(), index);
        }
        Ok(Self { row_play, fields })
    }

    fn clause_rows(&self, clause: &FilterClause) -> Vec<u32> {
        let Some(index) = self.fields.get(clause.field()) else {
            return Vec::new();
        };
        match (clause, index) {
            (FilterClause::Term { value, .. }, FieldIndex::Terms(p)) => {
                p.get(&TermKey::of_scalar(value)).cloned().unwrap_or_default()
            }
            (FilterClause::In { value, .. }, FieldIndex::Terms(p)) => {
                let mut out: Vec<u32> = value
                    .iter()
                    .filter_map(|v| p.get(&TermKey::of_scalar(v)))
                    .flatten()
                    .copied()
                    .collect();
                out.sort_unstable();
                out.dedup();
                out
            }
            (FilterClause::Range { value, .. }, FieldIndex::Sorted(s)) => {
                use crate::request::Cmp::*;
                let b = value.bound;
                let slice = match value.cmp {
                    Gt => &s[s.partition_point(|(v, _)| *v <= b)..],
                    Gte => &s[s.partition_point(|(v, _)| *v < b)..],
                    Lt => &s[..s.partition_point(|(v, _)| *v < b)],
                    Lte => &s[..s.partition_point(|(v, _)| *v <= b)],
                };
                let mut out: Vec<u32> = slice.iter().map(|(_, r)| *r).collect();
                out.sort_unstable();
                out
            }
            // validation keeps operator/kind pairs consistent
            _ => Vec::new(),
        }
    }

    /// Sorted, deduplicated play indices matching every clause.
    fn matching_plays(&self, clauses: &[FilterClause]) -> Vec<u32> {
        let mut sets: Vec<Vec<u32>> = clauses.iter().map(|c| self.clause_rows(c)).collect();
        sets.sort_by_key(Vec::len);
        let rows: Vec<u32> = match sets.split_first() {
            None => (0..self.row_play.len() as u32).collect(),
            Some((first, rest)) => rest
                .iter()
                .fold(first.clone(), |acc, s| intersect_sorted(&acc, s)),
        };
        let mut plays: Vec<u32> = rows.iter().map(|r| self.row_play[*r as usize]).collect();
        plays.sort_unstable();
        plays.dedup();
        plays
    }
}

fn intersect_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Read-only after [`PlayStore::ingest`]; safe to share across threads.
#[derive(Debug)]
pub struct PlayStore {
    registry: Arc<SchemaRegistry>,
    plays: Vec<PlayRecord>,
    rank: Vec<u32>,
    tables: HashMap<SchemaName, Table>,
}

impl PlayStore {
    pub fn ingest(
        records: impl IntoIterator<Item = PlayRecord>,
        registry: Arc<SchemaRegistry>,
    ) -> Result<Self, IngestError> {
        let plays: Vec<PlayRecord> = records.into_iter().collect();
        let mut seen = HashSet::with_capacity(plays.len());
        for p in &plays {
            if !seen.insert(p.play_id.as_str()) {
                return Err(IngestError::Duplicate(p.play_id.clone()));
            }
            p.check().map_err(|(field, reason)| IngestError::Invalid {
                play_id: p.play_id.clone(),
                field: field.to_string(),
                reason,
            })?;
        }
        let mut order: Vec<u32> = (0..plays.len() as u32).collect();
        order.sort_by(|a, b| {
            let (x, y) = (&plays[*a as usize], &plays[*b as usize]);
            (x.season, x.week, &x.play_id).cmp(&(y.season, y.week, &y.play_id))
        });
        let mut rank = vec![0u32; plays.len()];
        for (r, pi) in order.iter().enumerate() {
            rank[*pi as usize] = r as u32;
        }
        let mut tables = HashMap::new();
        for name in registry.names() {
            tables.insert(name, Table::build(name, &registry, &plays)?);
        }
        Ok(Self {
            registry,
            plays,
            rank,
            tables,
        })
    }

    pub fn len(&self) -> usize {
        self.plays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plays.is_empty()
    }

    pub fn records(&self) -> &[PlayRecord] {
        &self.plays
    }

    /// Rows indexed for a schema; a defense row is one defender on a play.
    pub fn rows(&self, schema: SchemaName) -> usize {
        self.tables.get(&schema).map_or(0, |t| t.row_play.len())
    }

    pub fn registry(&self) -> &Arc<SchemaRegistry> {
        &self.registry
    }

    pub fn execute(&self, request: &SearchRequest) -> Result<SearchResult, ExecError> {
        self.execute_plan(&QueryPlan::single(request.clone()))
    }

    pub fn execute_plan(&self, plan: &QueryPlan) -> Result<SearchResult, ExecError> {
        self.validate(plan)?;
        let mut acc: Option<Vec<u32>> = None;
        for r in &plan.requests {
            let table = &self.tables[&r.schema];
            let plays = table.matching_plays(&r.clauses);
            acc = Some(match acc {
                None => plays,
                Some(prev) => intersect_sorted(&prev, &plays),
            });
        }
        let mut plays = acc.unwrap_or_default();
        plays.sort_by_key(|p| self.rank[*p as usize]);
        let play_ids: Vec<String> = plays
            .iter()
            .map(|p| self.plays[*p as usize].play_id.clone())
            .collect();
        Ok(SearchResult {
            count: play_ids.len(),
            play_ids,
        })
    }

    /// Linear scan; never touches the indexes.
    pub fn brute_force_count(&self, predicate: impl Fn(&PlayRecord) -> bool) -> usize {
        self.plays.iter().filter(|p| predicate(p)).count()
    }

    pub fn brute_force_ids(&self, predicate: impl Fn(&PlayRecord) -> bool) -> Vec<String> {
        let mut hits: Vec<&PlayRecord> = self.plays.iter().filter(|p| predicate(p)).collect();
        hits.sort_by(|x, y| (x.season, x.week, &x.play_id).cmp(&(y.season, y.week, &y.play_id)));
        hits.into_iter().map(|p| p.play_id.clone()).collect()
    }

    fn validate(&self, plan: &QueryPlan) -> Result<(), ExecError> {
        if plan.requests.is_empty() {
            return Err(ExecError {
                code: ExecErrorCode::EmptyPlan,
                schema: None,
                field: None,
                suggestion: None,
                message: "query plan contains no requests".into(),
            });
        }
        for r in &plan.requests {
            let Some(schema) = self.registry.get(r.schema) else {
                return Err(ExecError {
                    code: ExecErrorCode::UnknownSchema,
                    schema: Some(r.schema),
                    field: None,
                    suggestion: None,
                    message: format!("unknown schema '{}'", r.schema),
                });
            };
            for c in &r.clauses {
                let key = c.field();
                if !schema.has_field(key) {
                    let suggestion = schema
                        .field_keys()
                        .map(|k| (strsim::levenshtein(k, key), k))
                        .filter(|(d, _)| *d <= 2)
                        .min()
                        .map(|(_, k)| k.to_string());
                    let hint = suggestion
                        .as_ref()
                        .map(|s| format!(" (did you mean '{s}'?)"))
                        .unwrap_or_default();
                    return Err(ExecError {
                        code: ExecErrorCode::UnknownField,
                        schema: Some(r.schema),
                        field: Some(key.to_string()),
                        suggestion,
                        message: format!("unknown field '{key}' in schema '{}'{hint}", r.schema),
                    });
                }
                if let Err(v) = validate_filter(schema, c) {
                    return Err(ExecError {
                        code: ExecErrorCode::IllegalClause,
                        schema: Some(r.schema),
                        field: Some(key.to_string()),
                        suggestion: None,
                        message: format!("illegal clause on '{key}' in schema '{}': {v}", r.schema),
                    });
                }
            }
            if let Err(msg) = check_consistency(&r.clauses) {
                return Err(ExecError {
                    code: ExecErrorCode::InconsistentRequest,
                    schema: Some(r.schema),
                    field: None,
                    suggestion: None,
                    message: msg,
                });
            }
        }
        Ok(())
    }
}

/// Index-free evaluation of a plan on one record: for every request, some
/// row of the record satisfies all of its clauses.
pub fn plan_matches(plan: &QueryPlan, play: &PlayRecord) -> bool {
    plan.requests.iter().all(|r| {
        bindings::rows_of(r.schema, play)
            .into_iter()
            .any(|row| r.clauses.iter().all(|c| bindings::clause_holds(r.schema, c, row)))
    })
}
