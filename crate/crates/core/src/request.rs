//! Compiled search requests and their canonical wire form.
//!
//! ```json
//! {"schema": "passing", "clauses": [
//!   {"op": "range", "field": "passYards", "value": {"cmp": "gt", "bound": 10.0}},
//!   {"op": "term", "field": "touchdown", "value": 1}]}
//! ```
//!
//! Clauses are canonicalized (sorted by field, then op) before serialization
//! so that equal requests serialize to equal bytes.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::schema::{fmt_num, validate_filter, SchemaName, SchemaRegistry};

/// A scalar filter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Int(i64),
    Float(f64),
    Str(String),
}

impl Scalar {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Scalar::Int(i) => Some(*i as f64),
            Scalar::Float(f) => Some(*f),
            Scalar::Str(_) => None,
        }
    }

    /// Equality that treats `1` and `1.0` as the same number.
    pub fn loosely_eq(&self, other: &Scalar) -> bool {
        match (self, other) {
            (Scalar::Str(a), Scalar::Str(b)) => a == b,
            (Scalar::Int(a), Scalar::Int(b)) => a == b,
            _ => match (self.as_f64(), other.as_f64()) {
                (Some(a), Some(b)) => a == b,
                _ => false,
            },
        }
    }

    fn total_cmp(&self, other: &Scalar) -> Ordering {
        fn rank(s: &Scalar) -> u8 {
            match s {
                Scalar::Int(_) | Scalar::Float(_) => 0,
                Scalar::Str(_) => 1,
            }
        }
        match (self, other) {
            (Scalar::Str(a), Scalar::Str(b)) => a.cmp(b),
            (Scalar::Int(a), Scalar::Int(b)) => a.cmp(b),
            _ => match (self.as_f64(), other.as_f64()) {
                (Some(a), Some(b)) => a.total_cmp(&b),
                _ => rank(self).cmp(&rank(other)),
            },
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Int(i) => write!(f, "{i}"),
            Scalar::Float(v) => f.write_str(&fmt_num(*v)),
            Scalar::Str(s) => f.write_str(s),
        }
    }
}

impl From<i64> for Scalar {
    fn from(v: i64) -> Self {
        Scalar::Int(v)
    }
}

impl From<&str> for Scalar {
    fn from(v: &str) -> Self {
        Scalar::Str(v.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cmp {
    Gt,
    Gte,
    Lt,
    Lte,
}

impl Cmp {
    pub fn as_str(self) -> &'static str {
        match self {
            Cmp::Gt => "gt",
            Cmp::Gte => "gte",
            Cmp::Lt => "lt",
            Cmp::Lte => "lte",
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Gt => ">",
            Cmp::Gte => ">=",
            Cmp::Lt => "<",
            Cmp::Lte => "<=",
        }
    }

    pub fn holds(self, value: f64, bound: f64) -> bool {
        match self {
            Cmp::Gt => value > bound,
            Cmp::Gte => value >= bound,
            Cmp::Lt => value < bound,
            Cmp::Lte => value <= bound,
        }
    }
}

impl fmt::Display for Cmp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeBound {
    pub cmp: Cmp,
    pub bound: f64,
}

/// One conjunct of a search request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum FilterClause {
    Term { field: String, value: Scalar },
    Range { field: String, value: RangeBound },
    In { field: String, value: Vec<Scalar> },
}

impl FilterClause {
    pub fn term(field: impl Into<String>, value: impl Into<Scalar>) -> Self {
        FilterClause::Term {
            field: field.into(),
            value: value.into(),
        }
    }

    pub fn range(field: impl Into<String>, cmp: Cmp, bound: f64) -> Self {
        FilterClause::Range {
            field: field.into(),
            value: RangeBound { cmp, bound },
        }
    }

    pub fn one_of(field: impl Into<String>, values: Vec<Scalar>) -> Self {
        FilterClause::In {
            field: field.into(),
            value: values,
        }
    }

    pub fn field(&self) -> &str {
        match self {
            FilterClause::Term { field, .. }
            | FilterClause::Range { field, .. }
            | FilterClause::In { field, .. } => field,
        }
    }

    pub fn field_mut(&mut self) -> &mut String {
        match self {
            FilterClause::Term { field, .. }
            | FilterClause::Range { field, .. }
            | FilterClause::In { field, .. } => field,
        }
    }

    pub fn op_name(&self) -> &'static str {
        match self {
            FilterClause::Term { .. } => "term",
            FilterClause::Range { .. } => "range",
            FilterClause::In { .. } => "in",
        }
    }

    fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.field()
            .cmp(other.field())
            .then_with(|| self.op_name().cmp(other.op_name()))
            .then_with(|| match (self, other) {
                (FilterClause::Term { value: a, .. }, FilterClause::Term { value: b, .. }) => {
                    a.total_cmp(b)
                }
                (FilterClause::Range { value: a, .. }, FilterClause::Range { value: b, .. }) => a
                    .cmp
                    .cmp(&b.cmp)
                    .then_with(|| a.bound.total_cmp(&b.bound)),
                (FilterClause::In { value: a, .. }, FilterClause::In { value: b, .. }) => a
                    .iter()
                    .zip(b)
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or_else(|| a.len().cmp(&b.len())),
                _ => Ordering::Equal,
            })
    }
}

impl fmt::Display for FilterClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FilterClause::Term { field, value } => write!(f, "{field} = {value}"),
            FilterClause::Range { field, value } => {
                write!(f, "{field} {} {}", value.cmp.symbol(), fmt_num(value.bound))
            }
            FilterClause::In { field, value } => {
                let v: Vec<String> = value.iter().map(|s| s.to_string()).collect();
                write!(f, "{field} in [{}]", v.join(", "))
            }
        }
    }
}

/// A conjunctive query against one schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchRequest {
    pub schema: SchemaName,
    pub clauses: Vec<FilterClause>,
}

impl SearchRequest {
    pub fn new(schema: SchemaName, clauses: Vec<FilterClause>) -> Self {
        Self { schema, clauses }
    }

    /// Sorts clauses by (field, op, value) and normalizes `in` value lists.
    pub fn canonicalize(&mut self) {
        for c in &mut self.clauses {
            if let FilterClause::In { value, .. } = c {
                value.sort_by(|a, b| a.total_cmp(b));
                value.dedup_by(|a, b| a.loosely_eq(b));
            }
        }
        self.clauses.sort_by(|a, b| a.canonical_cmp(b));
    }

    pub fn canonical(&self) -> Self {
        let mut c = self.clone();
        c.canonicalize();
        c
    }

    pub fn canonical_json(&self) -> String {
        serde_json::to_string(&self.canonical()).expect("request serializes")
    }

    /// Checks the request invariants: every clause validates against its
    /// schema, at most one term per field, and range clauses on a field are
    /// jointly satisfiable.
    pub fn check(&self, registry: &SchemaRegistry) -> Result<(), String> {
        let schema = registry
            .get(self.schema)
            .ok_or_else(|| format!("unknown schema '{}'", self.schema))?;
        for c in &self.clauses {
            validate_filter(schema, c).map_err(|v| v.0)?;
        }
        check_consistency(&self.clauses)
    }
}

/// Rejects duplicate terms with different values and empty ranges.
pub fn check_consistency(clauses: &[FilterClause]) -> Result<(), String> {
    let mut terms: BTreeMap<&str, &Scalar> = BTreeMap::new();
    let mut ranges: BTreeMap<&str, (f64, bool, f64, bool)> = BTreeMap::new();
    for c in clauses {
        match c {
            FilterClause::Term { field, value } => {
                if let Some(prev) = terms.insert(field, value) {
                    if !prev.loosely_eq(value) {
                        return Err(format!(
                            "conflicting values for field '{field}': {prev} and {value}"
                        ));
                    }
                    return Err(format!("duplicate term on field '{field}'"));
                }
            }
            FilterClause::Range { field, value } => {
                let e = ranges
                    .entry(field)
                    .or_insert((f64::NEG_INFINITY, true, f64::INFINITY, true));
                match value.cmp {
                    Cmp::Gt | Cmp::Gte => {
                        let incl = value.cmp == Cmp::Gte;
                        if value.bound > e.0 || (value.bound == e.0 && !incl) {
                            e.0 = value.bound;
                            e.1 = incl;
                        }
                    }
                    Cmp::Lt | Cmp::Lte => {
                        let incl = value.cmp == Cmp::Lte;
                        if value.bound < e.2 || (value.bound == e.2 && !incl) {
                            e.2 = value.bound;
                            e.3 = incl;
                        }
                    }
                }
            }
            FilterClause::In { .. } => {}
        }
    }
    for (field, (lo, lo_incl, hi, hi_incl)) in ranges {
        if lo > hi || (lo == hi && !(lo_incl && hi_incl)) {
            return Err(format!("unsatisfiable range on field '{field}'"));
        }
    }
    Ok(())
}

/// One request per schema involved; results are intersected on play id.
///
/// A single-schema plan serializes exactly as a [`SearchRequest`]; a
/// multi-schema plan serializes as an array of them.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryPlan {
    pub requests: Vec<SearchRequest>,
}

impl QueryPlan {
    pub fn single(request: SearchRequest) -> Self {
        Self {
            requests: vec![request],
        }
    }

    pub fn new(requests: Vec<SearchRequest>) -> Self {
        Self { requests }
    }

    pub fn schemas(&self) -> Vec<SchemaName> {
        self.requests.iter().map(|r| r.schema).collect()
    }

    pub fn clauses(&self) -> impl Iterator<Item = (SchemaName, &FilterClause)> {
        self.requests
            .iter()
            .flat_map(|r| r.clauses.iter().map(move |c| (r.schema, c)))
    }

    pub fn clauses_mut(&mut self) -> impl Iterator<Item = &mut FilterClause> {
        self.requests.iter_mut().flat_map(|r| r.clauses.iter_mut())
    }

    pub fn canonical(&self) -> Self {
        let mut requests: Vec<SearchRequest> =
            self.requests.iter().map(SearchRequest::canonical).collect();
        requests.sort_by_key(|r| r.schema.as_str());
        Self { requests }
    }

    pub fn canonical_json(&self) -> String {
        serde_json::to_string(&self.canonical()).expect("plan serializes")
    }

    pub fn check(&self, registry: &SchemaRegistry) -> Result<(), String> {
        if self.requests.is_empty() {
            return Err("empty query plan".into());
        }
        for r in &self.requests {
            r.check(registry)?;
        }
        Ok(())
    }
}

impl From<SearchRequest> for QueryPlan {
    fn from(r: SearchRequest) -> Self {
        QueryPlan::single(r)
    }
}

impl Serialize for QueryPlan {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.requests.len() == 1 {
            self.requests[0].serialize(s)
        } else {
            self.requests.serialize(s)
        }
    }
}

impl<'de> Deserialize<'de> for QueryPlan {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            One(SearchRequest),
            Many(Vec<SearchRequest>),
        }
        Ok(match Raw::deserialize(d)? {
            Raw::One(r) => QueryPlan::single(r),
            Raw::Many(v) => QueryPlan::new(v),
        })
    }
}
