//! Statistical schemas: the typed field catalogues that constrain which
//! filters a compiled search request may use.
//!
//! Each schema lives in its own JSON document (`<name>.schema.json`). A
//! registry is loaded once at startup and shared read-only afterwards.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::request::{Cmp, FilterClause, Scalar};

/// The schema families a request can target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemaName {
    Passing,
    Rushing,
    Defense,
    TeamOffense,
    TeamDefense,
}

impl SchemaName {
    pub const ALL: [SchemaName; 5] = [
        SchemaName::Passing,
        SchemaName::Rushing,
        SchemaName::Defense,
        SchemaName::TeamOffense,
        SchemaName::TeamDefense,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SchemaName::Passing => "passing",
            SchemaName::Rushing => "rushing",
            SchemaName::Defense => "defense",
            SchemaName::TeamOffense => "team_offense",
            SchemaName::TeamDefense => "team_defense",
        }
    }
}

impl fmt::Display for SchemaName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemaName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SchemaName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| format!("unknown schema '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    OneOfList,
    Range,
    Singular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldFormat {
    Integer,
    Float,
    String,
}

impl FieldFormat {
    pub fn is_numeric(self) -> bool {
        !matches!(self, FieldFormat::String)
    }
}

/// One end of a numeric interval. Infinite ends are written `"-inf"` / `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    NegInf,
    Finite(f64),
    PosInf,
}

impl Bound {
    pub fn value(self) -> f64 {
        match self {
            Bound::NegInf => f64::NEG_INFINITY,
            Bound::Finite(v) => v,
            Bound::PosInf => f64::INFINITY,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::NegInf => f.write_str("-inf"),
            Bound::PosInf => f.write_str("inf"),
            Bound::Finite(v) => f.write_str(&fmt_num(*v)),
        }
    }
}

impl Serialize for Bound {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Bound::NegInf => s.serialize_str("-inf"),
            Bound::PosInf => s.serialize_str("inf"),
            Bound::Finite(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for Bound {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) if v.is_finite() => Ok(Bound::Finite(v)),
            Raw::Num(v) => Err(de::Error::custom(format!("non-finite bound {v}"))),
            Raw::Text(t) => match t.as_str() {
                "-inf" => Ok(Bound::NegInf),
                "inf" => Ok(Bound::PosInf),
                other => Err(de::Error::custom(format!(
                    "interval bound must be a number, \"-inf\" or \"inf\", got \"{other}\""
                ))),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub min: Bound,
    pub max: Bound,
}

impl Interval {
    pub fn contains(&self, v: f64) -> bool {
        v >= self.min.value() && v <= self.max.value()
    }
}

/// The legal domain of a field: an explicit value list or a numeric interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Domain {
    Values(Vec<Scalar>),
    Interval(Interval),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub key: String,
    pub kind: FieldKind,
    pub format: FieldFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Domain>,
    pub explanation: String,
}

impl FieldSpec {
    /// Explicit legal values, if the field has a closed list.
    pub fn legal_values(&self) -> Option<&[Scalar]> {
        match &self.values {
            Some(Domain::Values(v)) if !v.is_empty() => Some(v),
            _ => None,
        }
    }

    pub fn interval(&self) -> Option<&Interval> {
        match &self.values {
            Some(Domain::Interval(i)) => Some(i),
            _ => None,
        }
    }

    /// An open identifier set: a one-of-list field with no enumerated values.
    pub fn is_open_set(&self) -> bool {
        self.kind == FieldKind::OneOfList && self.legal_values().is_none()
    }

    fn check(&self) -> Result<(), String> {
        if self.key.is_empty() {
            return Err("empty field key".into());
        }
        match self.kind {
            FieldKind::Range => {
                if !self.format.is_numeric() {
                    return Err("range field must have a numeric format".into());
                }
                let Some(iv) = self.interval() else {
                    return Err("range field requires a {min, max} interval".into());
                };
                if iv.min.value() > iv.max.value() {
                    return Err(format!("empty interval [{}, {}]", iv.min, iv.max));
                }
            }
            FieldKind::Singular => {
                if self.legal_values().is_none() {
                    return Err("singular field requires a finite values list".into());
                }
            }
            FieldKind::OneOfList => {
                if self.interval().is_some() {
                    return Err("one-of-list field cannot carry an interval".into());
                }
                if self.format == FieldFormat::String
                    && self.legal_values().is_none()
                    && !self.explanation.to_ascii_lowercase().contains("identifier")
                {
                    return Err(
                        "string one-of-list field needs values or an explanation marking it as an identifier set"
                            .into(),
                    );
                }
            }
        }
        if let Some(values) = self.legal_values() {
            for v in values {
                if !format_accepts(self.format, v) {
                    return Err(format!("value {v} does not match format {:?}", self.format));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub name: SchemaName,
    pub description: String,
    pub fields: Vec<FieldSpec>,
}

impl Schema {
    pub fn field(&self, key: &str) -> Option<&FieldSpec> {
        self.fields.iter().find(|f| f.key == key)
    }

    pub fn has_field(&self, key: &str) -> bool {
        self.field(key).is_some()
    }

    pub fn field_keys(&self) -> impl Iterator<Item = &str> {
        self.fields.iter().map(|f| f.key.as_str())
    }

    fn check(&self) -> Result<(), (String, String)> {
        let mut seen = HashSet::new();
        for f in &self.fields {
            if !seen.insert(f.key.as_str()) {
                return Err((f.key.clone(), "duplicate field key".into()));
            }
            f.check().map_err(|e| (f.key.clone(), e))?;
        }
        for required in ["season", "seasonType", "week"] {
            if !self.has_field(required) {
                return Err((required.into(), "required context field missing".into()));
            }
        }
        if !self.has_field("nflId") && !self.has_field("teamId") {
            return Err(("nflId".into(), "schema needs nflId or teamId".into()));
        }
        Ok(())
    }
}

/// A clause that does not fit its schema.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation(pub String);

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Checks one clause against a schema: field exists, operator fits the field
/// kind, and the value lies in the legal domain.
pub fn validate_filter(schema: &Schema, clause: &FilterClause) -> Result<(), Violation> {
    let key = clause.field();
    let Some(spec) = schema.field(key) else {
        return Err(Violation(format!(
            "unknown field '{key}' in schema '{}'",
            schema.name
        )));
    };
    match clause {
        FilterClause::Term { value, .. } => check_equality(spec, std::slice::from_ref(value)),
        FilterClause::In { value, .. } => {
            if value.is_empty() {
                return Err(Violation(format!("empty value list for field '{key}'")));
            }
            check_equality(spec, value)
        }
        FilterClause::Range { value, .. } => {
            if spec.kind != FieldKind::Range {
                return Err(Violation(format!(
                    "range operator {} not allowed on {} field '{key}'",
                    value.cmp,
                    kind_name(spec.kind)
                )));
            }
            if !value.bound.is_finite() {
                return Err(Violation(format!("non-finite bound for field '{key}'")));
            }
            if let Some(iv) = spec.interval() {
                if value.bound < iv.min.value() {
                    return Err(Violation(format!(
                        "{} below interval lower bound {}",
                        fmt_num(value.bound),
                        iv.min
                    )));
                }
                if value.bound > iv.max.value() {
                    return Err(Violation(format!(
                        "{} above interval upper bound {}",
                        fmt_num(value.bound),
                        iv.max
                    )));
                }
            }
            Ok(())
        }
    }
}

fn check_equality(spec: &FieldSpec, values: &[Scalar]) -> Result<(), Violation> {
    if spec.kind == FieldKind::Range {
        return Err(Violation(format!(
            "equality operator not allowed on range field '{}'",
            spec.key
        )));
    }
    for v in values {
        if !format_accepts(spec.format, v) {
            return Err(Violation(format!(
                "{v} is not a valid {} value for field '{}'",
                format_name(spec.format),
                spec.key
            )));
        }
        if let Some(legal) = spec.legal_values() {
            if !legal.iter().any(|l| l.loosely_eq(v)) {
                let list: Vec<String> = legal.iter().map(|l| l.to_string()).collect();
                return Err(Violation(format!("{v} not in [{}]", list.join(","))));
            }
        }
    }
    Ok(())
}

fn format_accepts(format: FieldFormat, v: &Scalar) -> bool {
    match (format, v) {
        (FieldFormat::Integer, Scalar::Int(_)) => true,
        (FieldFormat::Float, Scalar::Int(_) | Scalar::Float(_)) => true,
        (FieldFormat::String, Scalar::Str(_)) => true,
        _ => false,
    }
}

fn kind_name(kind: FieldKind) -> &'static str {
    match kind {
        FieldKind::OneOfList => "one-of-list",
        FieldKind::Range => "range",
        FieldKind::Singular => "singular",
    }
}

fn format_name(format: FieldFormat) -> &'static str {
    match format {
        FieldFormat::Integer => "integer",
        FieldFormat::Float => "float",
        FieldFormat::String => "string",
    }
}

/// Renders whole numbers without a trailing `.0`.
pub fn fmt_num(v: f64) -> String {
    if v.is_finite() && v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("cannot read schema location {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed schema document {file}: {source}")]
    Parse {
        file: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("invalid schema document {file}: field '{field}': {reason}")]
    Invalid {
        file: String,
        field: String,
        reason: String,
    },
    #[error("duplicate schema name '{0}'")]
    Duplicate(SchemaName),
    #[error("no schema documents found in {0}")]
    Empty(PathBuf),
}

/// Parses and checks a single schema document.
pub fn parse_schema(file: &str, text: &str) -> Result<Schema, SchemaError> {
    let schema: Schema = serde_json::from_str(text).map_err(|source| SchemaError::Parse {
        file: file.to_string(),
        source,
    })?;
    schema
        .check()
        .map_err(|(field, reason)| SchemaError::Invalid {
            file: file.to_string(),
            field,
            reason,
        })?;
    Ok(schema)
}

/// Loads every `*.schema.json` document in `dir`, sorted by file name.
pub fn load_schemas(dir: impl AsRef<Path>) -> Result<Vec<Schema>, SchemaError> {
    let dir = dir.as_ref();
    let io = |source| SchemaError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.ends_with(".schema.json"))
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(SchemaError::Empty(dir.to_path_buf()));
    }
    let mut out = Vec::with_capacity(paths.len());
    for p in paths {
        let text = std::fs::read_to_string(&p).map_err(|source| SchemaError::Io {
            path: p.clone(),
            source,
        })?;
        let name = p.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        out.push(parse_schema(name, &text)?);
    }
    Ok(out)
}

/// Immutable set of schemas, ordered by [`SchemaName`].
#[derive(Debug, Clone, PartialEq)]
pub struct SchemaRegistry {
    schemas: BTreeMap<SchemaName, Schema>,
}

impl SchemaRegistry {
    pub fn new(schemas: Vec<Schema>) -> Result<Self, SchemaError> {
        let mut map = BTreeMap::new();
        for s in schemas {
            let name = s.name;
            if map.insert(name, s).is_some() {
                return Err(SchemaError::Duplicate(name));
            }
        }
        Ok(Self { schemas: map })
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self, SchemaError> {
        Self::new(load_schemas(dir)?)
    }

    pub fn get(&self, name: SchemaName) -> Option<&Schema> {
        self.schemas.get(&name)
    }

    pub fn names(&self) -> impl Iterator<Item = SchemaName> + '_ {
        self.schemas.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Schema> {
        self.schemas.values()
    }

    pub fn len(&self) -> usize {
        self.schemas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.schemas.is_empty()
    }

    /// True if any registered schema declares `key`.
    pub fn knows_field(&self, key: &str) -> bool {
        self.iter().any(|s| s.has_field(key))
    }
}

/// Builds a clause that `spec` accepts, drawn from its legal domain.
pub fn sample_clause(spec: &FieldSpec) -> FilterClause {
    let field = spec.key.clone();
    match spec.kind {
        FieldKind::Range => {
            let iv = spec.interval().copied().unwrap_or(Interval {
                min: Bound::NegInf,
                max: Bound::PosInf,
            });
            let bound = match (iv.min, iv.max) {
                (Bound::Finite(a), _) => a,
                (_, Bound::Finite(b)) => b,
                _ => 0.0,
            };
            FilterClause::range(field, Cmp::Gte, bound)
        }
        _ => {
            let value = match spec.legal_values() {
                Some(v) => v[0].clone(),
                None => match spec.format {
                    FieldFormat::String => Scalar::Str("x".into()),
                    FieldFormat::Integer => Scalar::Int(1),
                    FieldFormat::Float => Scalar::Float(1.0),
                },
            };
            FilterClause::term(field, value)
        }
    }
}
