//! The grammar backend's vocabulary: action phrases, condition patterns,
//! fillers and opponent markers.
//!
//! Condition patterns may contain one placeholder: `{num}` (a non-negative
//! number), `{int}` (a non-negative integer) or `{year}` (a four-digit
//! year). The same placeholder appears in the entry's label, so a label such
//! as `">10 yards"` can be mapped back to the entry that produced it.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::request::{Cmp, FilterClause, Scalar};
use crate::schema::{validate_filter, SchemaName, SchemaRegistry};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionEntry {
    pub name: String,
    pub phrases: Vec<String>,
    pub schema: SchemaName,
    pub assigns: Vec<FilterClause>,
    /// A generic action folds into a more specific action's schema when
    /// both appear in one prompt ("touchdowns" + "throw").
    #[serde(default)]
    pub generic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CondOp {
    Term,
    Gt,
    Gte,
    Lt,
    Lte,
}

impl CondOp {
    fn cmp(self) -> Option<Cmp> {
        match self {
            CondOp::Term => None,
            CondOp::Gt => Some(Cmp::Gt),
            CondOp::Gte => Some(Cmp::Gte),
            CondOp::Lt => Some(Cmp::Lt),
            CondOp::Lte => Some(Cmp::Lte),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionEntry {
    pub pattern: String,
    pub label: String,
    /// One field key, or several separated by `|` in order of preference.
    pub field: String,
    pub op: CondOp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<Scalar>,
}

impl ConditionEntry {
    pub fn fields(&self) -> impl Iterator<Item = &str> {
        self.field.split('|')
    }

    /// Builds the clause for `field` given the captured placeholder text.
    pub fn clause(&self, field: &str, captured: Option<&str>) -> Result<FilterClause, String> {
        let placeholder = placeholder_of(&self.pattern);
        let number = |s: &str| -> Result<f64, String> {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("'{s}' is not a number"))
        };
        match self.op.cmp() {
            Some(cmp) => {
                let bound = match (&self.value, captured) {
                    (Some(v), _) => v.as_f64().ok_or("range condition needs a numeric value")?,
                    (None, Some(c)) => number(c)?,
                    (None, None) => return Err(format!("condition '{}' has no value", self.label)),
                };
                Ok(FilterClause::range(field, cmp, bound))
            }
            None => {
                let value = match (&self.value, captured, placeholder) {
                    (Some(v), _, _) => v.clone(),
                    (None, Some(c), Some(Placeholder::Num)) => {
                        let v = number(c)?;
                        if v.fract() == 0.0 {
                            Scalar::Int(v as i64)
                        } else {
                            Scalar::Float(v)
                        }
                    }
                    (None, Some(c), Some(_)) => Scalar::Int(
                        c.parse::<i64>()
                            .map_err(|_| format!("'{c}' is not an integer"))?,
                    ),
                    _ => return Err(format!("condition '{}' has no value", self.label)),
                };
                Ok(FilterClause::term(field, value))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Placeholder {
    Num,
    Int,
    Year,
}

impl Placeholder {
    fn parse(tok: &str) -> Option<Self> {
        match tok {
            "{num}" => Some(Placeholder::Num),
            "{int}" => Some(Placeholder::Int),
            "{year}" => Some(Placeholder::Year),
            _ => None,
        }
    }

    fn text(self) -> &'static str {
        match self {
            Placeholder::Num => "{num}",
            Placeholder::Int => "{int}",
            Placeholder::Year => "{year}",
        }
    }

    fn accepts(self, tok: &str) -> bool {
        let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
        match self {
            Placeholder::Num => match tok.split_once('.') {
                Some((a, b)) => digits(a) && digits(b),
                None => digits(tok),
            },
            Placeholder::Int => digits(tok),
            Placeholder::Year => tok.len() == 4 && digits(tok) && (tok.starts_with("19") || tok.starts_with("20")),
        }
    }
}

fn placeholder_of(pattern: &str) -> Option<Placeholder> {
    pattern.split_whitespace().find_map(Placeholder::parse)
}

#[derive(Debug, Clone, PartialEq)]
enum PatTok {
    Word(String),
    Slot(Placeholder),
}

/// One longest-match hit at a token position.
#[derive(Debug, Clone, PartialEq)]
pub enum LexMatch {
    Action { index: usize, len: usize },
    Condition { index: usize, len: usize, captured: Option<String> },
    Filler { len: usize },
}

impl LexMatch {
    pub fn len(&self) -> usize {
        match self {
            LexMatch::Action { len, .. } | LexMatch::Condition { len, .. } | LexMatch::Filler { len } => *len,
        }
    }

    fn priority(&self) -> u8 {
        match self {
            LexMatch::Action { .. } => 2,
            LexMatch::Condition { .. } => 1,
            LexMatch::Filler { .. } => 0,
        }
    }
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("cannot read lexicon: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed lexicon: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid lexicon entry '{entry}': {reason}")]
    Invalid { entry: String, reason: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct LexiconFile {
    #[serde(default)]
    version: u32,
    #[serde(default)]
    fillers: Vec<String>,
    #[serde(default)]
    opponent_markers: Vec<String>,
    #[serde(default)]
    domain_terms: Vec<String>,
    actions: Vec<ActionEntry>,
    conditions: Vec<ConditionEntry>,
}

#[derive(Debug, Clone)]
pub struct Lexicon {
    file: LexiconFile,
    action_phrases: Vec<(Vec<String>, usize)>,
    condition_patterns: Vec<(Vec<PatTok>, usize)>,
    fillers: Vec<Vec<String>>,
    vocabulary: HashSet<String>,
    domain: HashSet<String>,
    max_len: usize,
}

fn words(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_lowercase).collect()
}

impl Lexicon {
    pub fn from_json(text: &str) -> Result<Self, LexiconError> {
        Self::build(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LexiconError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    fn build(file: LexiconFile) -> Result<Self, LexiconError> {
        let invalid = |entry: &str, reason: String| LexiconError::Invalid {
            entry: entry.to_string(),
            reason,
        };
        let mut by_name: BTreeMap<&str, &ActionEntry> = BTreeMap::new();
        let mut action_phrases = Vec::new();
        for (i, a) in file.actions.iter().enumerate() {
            if !a.phrases.iter().any(|p| words(p) == words(&a.name)) {
                return Err(invalid(&a.name, "action name must be one of its phrases".into()));
            }
            if let Some(prev) = by_name.insert(&a.name, a) {
                if prev.schema != a.schema || prev.assigns != a.assigns {
                    return Err(invalid(&a.name, "entries sharing a name disagree".into()));
                }
            }
            for p in &a.phrases {
                let w = words(p);
                if w.is_empty() {
                    return Err(invalid(&a.name, "empty phrase".into()));
                }
                action_phrases.push((w, i));
            }
        }
        let mut by_label: BTreeMap<&str, &ConditionEntry> = BTreeMap::new();
        let mut condition_patterns = Vec::new();
        for (i, c) in file.conditions.iter().enumerate() {
            let toks: Vec<PatTok> = c
                .pattern
                .split_whitespace()
                .map(|t| match Placeholder::parse(t) {
                    Some(p) => PatTok::Slot(p),
                    None => PatTok::Word(t.to_lowercase()),
                })
                .collect();
            let slots: Vec<Placeholder> = toks
                .iter()
                .filter_map(|t| match t {
                    PatTok::Slot(p) => Some(*p),
                    PatTok::Word(_) => None,
                })
                .collect();
            if toks.is_empty() {
                return Err(invalid(&c.pattern, "empty pattern".into()));
            }
            if slots.len() > 1 {
                return Err(invalid(&c.pattern, "at most one placeholder per pattern".into()));
            }
            match slots.first() {
                Some(p) if !c.label.contains(p.text()) => {
                    return Err(invalid(&c.pattern, format!("label must contain {}", p.text())));
                }
                None if c.value.is_none() => {
                    return Err(invalid(&c.pattern, "needs a value or a placeholder".into()));
                }
                _ => {}
            }
            if let Some(prev) = by_label.insert(&c.label, c) {
                if (&prev.field, prev.op, &prev.value) != (&c.field, c.op, &c.value) {
                    return Err(invalid(&c.label, "conditions sharing a label disagree".into()));
                }
            }
            condition_patterns.push((toks, i));
        }
        let fillers: Vec<Vec<String>> = file.fillers.iter().map(|f| words(f)).collect();

        let mut vocabulary = HashSet::new();
        let mut domain: HashSet<String> = file.domain_terms.iter().map(|t| t.to_lowercase()).collect();
        for (w, _) in &action_phrases {
            vocabulary.extend(w.iter().cloned());
            if let [single] = w.as_slice() {
                domain.insert(single.clone());
            }
        }
        for (toks, _) in &condition_patterns {
            for t in toks {
                if let PatTok::Word(w) = t {
                    vocabulary.insert(w.clone());
                }
            }
        }
        for f in &fillers {
            vocabulary.extend(f.iter().cloned());
        }
        vocabulary.extend(file.opponent_markers.iter().map(|m| m.to_lowercase()));
        vocabulary.extend(domain.iter().cloned());
        let max_len = action_phrases
            .iter()
            .map(|(w, _)| w.len())
            .chain(condition_patterns.iter().map(|(t, _)| t.len()))
            .chain(fillers.iter().map(Vec::len))
            .max()
            .unwrap_or(1);
        Ok(Self {
            file,
            action_phrases,
            condition_patterns,
            fillers,
            vocabulary,
            domain,
            max_len,
        })
    }

    /// Every entry must target fields the registry knows, and action
    /// assignments must validate against the action's schema.
    pub fn check_against(&self, registry: &SchemaRegistry) -> Result<(), LexiconError> {
        for a in &self.file.actions {
            let schema = registry.get(a.schema).ok_or_else(|| LexiconError::Invalid {
                entry: a.name.clone(),
                reason: format!("schema '{}' is not registered", a.schema),
            })?;
            for c in &a.assigns {
                validate_filter(schema, c).map_err(|v| LexiconError::Invalid {
                    entry: a.name.clone(),
                    reason: v.0,
                })?;
            }
        }
        for c in &self.file.conditions {
            for f in c.fields() {
                if !registry.knows_field(f) {
                    return Err(LexiconError::Invalid {
                        entry: c.pattern.clone(),
                        reason: format!("field '{f}' is not in any registered schema"),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn version(&self) -> u32 {
        self.file.version
    }

    pub fn actions(&self) -> &[ActionEntry] {
        &self.file.actions
    }

    pub fn conditions(&self) -> &[ConditionEntry] {
        &self.file.conditions
    }

    pub fn action(&self, name: &str) -> Option<&ActionEntry> {
        self.file.actions.iter().find(|a| a.name == name)
    }

    pub fn is_vocabulary(&self, lower: &str) -> bool {
        self.vocabulary.contains(lower)
    }

    pub fn is_domain_term(&self, lower: &str) -> bool {
        self.domain.contains(lower)
    }

    pub fn is_opponent_marker(&self, lower: &str) -> bool {
        self.file.opponent_markers.iter().any(|m| m == lower)
    }

    pub fn is_filler(&self, tokens: &[&str]) -> bool {
        self.fillers.iter().any(|f| f.len() == tokens.len() && f.iter().zip(tokens).all(|(a, b)| a == b))
    }

    /// Longest lexicon match starting at `tokens[0]`. At equal length an
    /// action beats a condition, which beats a filler.
    pub fn match_at(&self, tokens: &[&str]) -> Option<LexMatch> {
        let mut best: Option<LexMatch> = None;
        let mut consider = |m: LexMatch| {
            let better = match &best {
                None => true,
                Some(b) => (m.len(), m.priority()) > (b.len(), b.priority()),
            };
            if better {
                best = Some(m);
            }
        };
        let limit = tokens.len().min(self.max_len);
        for (w, index) in &self.action_phrases {
            if w.len() <= limit && w.iter().zip(tokens).all(|(a, b)| a == b) {
                consider(LexMatch::Action {
                    index: *index,
                    len: w.len(),
                });
            }
        }
        for (toks, index) in &self.condition_patterns {
            if toks.len() > limit {
                continue;
            }
            let mut captured = None;
            let ok = toks.iter().zip(tokens).all(|(p, t)| match p {
                PatTok::Word(w) => w == t,
                PatTok::Slot(s) => {
                    let hit = s.accepts(t);
                    if hit {
                        captured = Some(t.to_string());
                    }
                    hit
                }
            });
            if ok {
                consider(LexMatch::Condition {
                    index: *index,
                    len: toks.len(),
                    captured,
                });
            }
        }
        for f in &self.fillers {
            if f.len() <= limit && f.iter().zip(tokens).all(|(a, b)| a == b) {
                consider(LexMatch::Filler { len: f.len() });
            }
        }
        best
    }

    /// Whether any action phrase occurs anywhere in `tokens`.
    pub fn mentions_action(&self, tokens: &[&str]) -> bool {
        (0..tokens.len()).any(|i| matches!(self.match_at(&tokens[i..]), Some(LexMatch::Action { .. })))
    }

    /// The label a matched condition contributes to a decomposition.
    pub fn label_for(&self, index: usize, captured: Option<&str>) -> String {
        let c = &self.file.conditions[index];
        match (placeholder_of(&c.pattern), captured) {
            (Some(p), Some(v)) => c.label.replace(p.text(), v),
            _ => c.label.clone(),
        }
    }

    /// Maps a decomposition label back to its entry and captured value.
    pub fn condition_for_label(&self, label: &str) -> Option<(&ConditionEntry, Option<String>)> {
        for c in &self.file.conditions {
            match placeholder_of(&c.pattern) {
                None if c.label == label => return Some((c, None)),
                None => {}
                Some(p) => {
                    let (pre, post) = c.label.split_once(p.text()).expect("checked at load");
                    if let Some(mid) = label.strip_prefix(pre).and_then(|r| r.strip_suffix(post)) {
                        if p.accepts(mid) {
                            return Some((c, Some(mid.to_string())));
                        }
                    }
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;

    #[test]
    fn bundled_lexicon_is_consistent_with_schemas() {
        let lex = bundled::lexicon();
        lex.check_against(&bundled::registry()).unwrap();
        assert!(lex.action("touchdown throw").is_some());
    }

    #[test]
    fn longest_match_prefers_longer_phrases() {
        let lex = bundled::lexicon();
        let toks = ["touchdown", "passes", "greater", "than", "10", "yards"];
        match lex.match_at(&toks).unwrap() {
            LexMatch::Action { index, len } => {
                assert_eq!(len, 2);
                assert_eq!(lex.actions()[index].name, "touchdown throw");
            }
            m => panic!("{m:?}"),
        }
        match lex.match_at(&toks[2..]).unwrap() {
            LexMatch::Condition { index, len, captured } => {
                assert_eq!(len, 4);
                assert_eq!(lex.label_for(index, captured.as_deref()), ">10 yards");
            }
            m => panic!("{m:?}"),
        }
    }

    #[test]
    fn labels_map_back_to_entries() {
        let lex = bundled::lexicon();
        let (c, v) = lex.condition_for_label(">=12.5 yards").unwrap();
        assert_eq!(c.op, CondOp::Gte);
        assert_eq!(c.clause("passYards", v.as_deref()).unwrap(), FilterClause::range("passYards", Cmp::Gte, 12.5));
        let (c, v) = lex.condition_for_label("season 2022").unwrap();
        assert_eq!(c.clause("season", v.as_deref()).unwrap(), FilterClause::term("season", 2022));
        let (c, _) = lex.condition_for_label("under center").unwrap();
        assert_eq!(c.value, Some(Scalar::Str("UNDER_CENTER".into())));
        assert!(lex.condition_for_label("sneezed").is_none());
    }

    #[test]
    fn rejects_entries_with_unknown_fields() {
        let text = r#"{"actions":[{"name":"pass","phrases":["pass"],"schema":"passing","assigns":[]}],
            "conditions":[{"pattern":"sideways","label":"sideways","field":"wobble","op":"term","value":1}]}"#;
        let lex = Lexicon::from_json(text).unwrap();
        let err = lex.check_against(&bundled::registry()).unwrap_err();
        assert!(err.to_string().contains("wobble"), "{err}");
    }

    #[test]
    fn rejects_label_without_placeholder() {
        let text = r#"{"actions":[],"conditions":[{"pattern":"over {num} yards","label":"long","field":"passYards","op":"gt"}]}"#;
        assert!(Lexicon::from_json(text).is_err());
    }
}
