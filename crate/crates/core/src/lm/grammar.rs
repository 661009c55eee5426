//! The deterministic backend: a longest-match parser over the lexicon plus
//! rule-based routing, formulation, repair, summaries and rewriting.

use std::sync::Arc;

use crate::directory::{Directory, EntityKind, EntityRole};
use crate::schema::{SchemaName, SchemaRegistry};

use super::compile::{self, route_schemas};
use super::lexicon::{LexMatch, Lexicon, LexiconError};
use super::normalize::Normalizer;
use super::rewrite::rewrite_followup;
use super::summary::summarize;
use super::{Decomposition, EntityMention, IntentLabel, LmBackend, LmError, LmOutcome, LmResult, LmTask};

#[derive(Debug, Clone)]
pub struct GrammarBackend {
    normalizer: Normalizer,
    registry: Arc<SchemaRegistry>,
}

fn capitalized(tok: &str) -> bool {
    tok.chars().next().is_some_and(char::is_uppercase)
}

impl GrammarBackend {
    /// Fails if a lexicon entry names a field no registered schema has.
    pub fn new(
        registry: Arc<SchemaRegistry>,
        directory: Arc<Directory>,
        lexicon: Arc<Lexicon>,
    ) -> Result<Self, LexiconError> {
        lexicon.check_against(&registry)?;
        Ok(Self {
            normalizer: Normalizer::new(directory, lexicon),
            registry,
        })
    }

    pub fn normalizer(&self) -> &Normalizer {
        &self.normalizer
    }

    fn lexicon(&self) -> &Lexicon {
        self.normalizer.lexicon()
    }

    pub fn classify(&self, prompt: &str) -> (IntentLabel, String) {
        let n = self.normalizer.normalize(prompt);
        let lex = self.lexicon();
        let terms: Vec<&str> = n
            .tokens
            .iter()
            .map(String::as_str)
            .filter(|t| lex.is_domain_term(t))
            .collect();
        if !n.names.is_empty() || !terms.is_empty() {
            let names: Vec<String> = n.names.iter().map(|s| n.mention(*s)).collect();
            (
                IntentLabel::FootballQuery,
                format!("football terms {terms:?}, known names {names:?}"),
            )
        } else {
            (
                IntentLabel::OutOfScope,
                "no football vocabulary or known names".into(),
            )
        }
    }

    /// Whether the prompt is "what about ..." followed only by words the
    /// lexicon knows, as in "What about in 2021?".
    pub fn is_fragment(&self, prompt: &str) -> bool {
        let n = self.normalizer.normalize(prompt);
        match super::rewrite::strip_marker(&n.tokens) {
            Some(rest) if !rest.is_empty() => self
                .segment(&rest.join(" "))
                .is_ok_and(|d| !d.conditions.is_empty() || !d.actions.is_empty()),
            _ => false,
        }
    }

    /// Segments the prompt into entities, actions and conditions. Any
    /// token that is neither a name, a lexicon phrase nor a filler is a
    /// no-parse.
    pub fn parse(&self, prompt: &str) -> Result<Decomposition, String> {
        let mut d = self.segment(prompt)?;
        if d.actions.is_empty() {
            return Err("no action phrase found".into());
        }
        d.actions = self.drop_subsumed(d.actions);
        Ok(d)
    }

    /// Like [`Self::parse`] but without requiring an action.
    fn segment(&self, prompt: &str) -> Result<Decomposition, String> {
        let n = self.normalizer.normalize(prompt);
        let lex = self.lexicon();
        if n.tokens.is_empty() {
            return Err("empty prompt: no clause matched".into());
        }
        let toks: Vec<&str> = n.tokens.iter().map(String::as_str).collect();
        let mut d = Decomposition::default();
        let mut opponent_next = false;
        let mut i = 0;
        while i < toks.len() {
            if let Some(span) = n.name_at(i) {
                let role = if opponent_next && span.kind == EntityKind::Team {
                    EntityRole::Opponent
                } else {
                    EntityRole::Actor
                };
                opponent_next = false;
                d.entities.push(EntityMention::new(n.mention(span), span.kind, role));
                i += span.len;
                continue;
            }
            if let Some(m) = lex.match_at(&toks[i..]) {
                match &m {
                    LexMatch::Action { index, .. } => {
                        let name = &lex.actions()[*index].name;
                        if !d.actions.contains(name) {
                            d.actions.push(name.clone());
                        }
                    }
                    LexMatch::Condition { index, captured, .. } => {
                        let label = lex.label_for(*index, captured.as_deref());
                        if !d.conditions.contains(&label) {
                            d.conditions.push(label);
                        }
                    }
                    LexMatch::Filler { .. } => {}
                }
                i += m.len();
                continue;
            }
            if lex.is_opponent_marker(toks[i]) {
                let mut j = i + 1;
                while j < toks.len() && n.name_at(j).is_none() {
                    match lex.match_at(&toks[j..]) {
                        Some(LexMatch::Filler { len }) => j += len,
                        _ => break,
                    }
                }
                if n.name_at(j).is_some_and(|s| s.kind == EntityKind::Team) {
                    opponent_next = true;
                    i += 1;
                    continue;
                }
            }
            if capitalized(toks[i]) {
                let start = i;
                while i < toks.len() && i - start < 3 && capitalized(toks[i]) && n.name_at(i).is_none() {
                    i += 1;
                }
                d.entities.push(EntityMention::new(
                    toks[start..i].join(" "),
                    EntityKind::Player,
                    EntityRole::Actor,
                ));
                continue;
            }
            return Err(format!("no lexicon entry matches '{}'", toks[i..].join(" ")));
        }
        Ok(d)
    }

    /// Removes an action whose clauses are implied by another action on
    /// the same schema ("pass" next to "touchdown throw").
    fn drop_subsumed(&self, actions: Vec<String>) -> Vec<String> {
        let lex = self.lexicon();
        let entries: Vec<_> = actions.iter().filter_map(|a| lex.action(a)).collect();
        let implied = |i: usize| {
            let a = entries[i];
            entries.iter().enumerate().any(|(j, b)| {
                j != i
                    && !a.generic
                    && !b.generic
                    && a.schema == b.schema
                    && a.assigns.iter().all(|c| b.assigns.contains(c))
                    && (b.assigns.len() > a.assigns.len() || j < i)
            })
        };
        if entries.len() != actions.len() {
            return actions;
        }
        actions
            .iter()
            .enumerate()
            .filter(|(i, _)| !implied(*i))
            .map(|(_, a)| a.clone())
            .collect()
    }

    fn names(schemas: &[crate::schema::Schema]) -> Vec<SchemaName> {
        schemas.iter().map(|s| s.name).collect()
    }
}

impl LmBackend for GrammarBackend {
    fn name(&self) -> &str {
        "grammar"
    }

    fn complete(&self, task: &LmTask) -> Result<LmOutcome, LmError> {
        let lex = self.lexicon();
        let reg = &self.registry;
        match task {
            LmTask::ClassifyIntent { prompt, followup } => {
                let (label, trace) = match self.classify(prompt) {
                    (IntentLabel::OutOfScope, _) if *followup && self.is_fragment(prompt) => {
                        (IntentLabel::FootballQuery, "follow-up fragment in lexicon vocabulary".into())
                    }
                    other => other,
                };
                Ok(LmOutcome::new(LmResult::Intent(label), trace))
            }
            LmTask::Decompose { prompt } => {
                let d = self.parse(prompt).map_err(LmError::Malformed)?;
                let trace = format!(
                    "entities {:?}; actions {:?}; conditions {:?}",
                    d.entities.iter().map(|e| e.mention.as_str()).collect::<Vec<_>>(),
                    d.actions,
                    d.conditions
                );
                Ok(LmOutcome::new(LmResult::Decomposition(d), trace))
            }
            LmTask::RouteSchema { decomposition } => {
                let s = route_schemas(lex, reg, decomposition)?;
                let trace = format!("minimal covering schemas {s:?}");
                Ok(LmOutcome::new(LmResult::Schemas(s), trace))
            }
            LmTask::Formulate {
                decomposition,
                schemas,
            } => {
                let plan = compile::formulate(lex, reg, decomposition, &Self::names(schemas))?;
                let trace = format!("mapped actions and conditions to {}", plan.canonical_json());
                Ok(LmOutcome::new(LmResult::Request(plan), trace))
            }
            LmTask::Repair {
                error,
                failed,
                decomposition,
                schemas,
            } => {
                let (plan, trace) = compile::repair(
                    lex,
                    reg,
                    error,
                    failed.as_ref(),
                    decomposition,
                    &Self::names(schemas),
                )?;
                Ok(LmOutcome::new(LmResult::Request(plan), trace))
            }
            LmTask::Summarize {
                request,
                count,
                decomposition,
            } => {
                let text = summarize(request, *count, decomposition, self.normalizer.directory());
                Ok(LmOutcome::new(LmResult::Text(text), "template summary"))
            }
            LmTask::RewriteFollowup { prompt, prior } => {
                let (text, trace) = rewrite_followup(&self.normalizer, prompt, prior);
                Ok(LmOutcome::new(LmResult::Rewritten(text), trace))
            }
        }
    }
}
