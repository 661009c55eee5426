//! Entity redaction: names become numbered, typed placeholders.

use serde::{Deserialize, Serialize};

use crate::directory::EntityKind;

use super::CacheError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub placeholder: String,
    pub kind: EntityKind,
    /// The replaced text.
    pub mention: String,
    /// Byte offset of the mention in the original prompt.
    pub start: usize,
    /// Byte offset of the placeholder in the redacted text.
    pub at: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RedactedQuery {
    pub text: String,
    pub slots: Vec<Slot>,
}

/// A mention to redact: byte range in the prompt and the entity kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub kind: EntityKind,
}

fn tag(kind: EntityKind) -> &'static str {
    match kind {
        EntityKind::Player => "PLAYER",
        EntityKind::Team => "TEAM",
    }
}

impl RedactedQuery {
    pub fn kinds(&self) -> Vec<EntityKind> {
        self.slots.iter().map(|s| s.kind).collect()
    }

    /// Puts `values` back in place of the placeholders, in slot order.
    pub fn fill<S: AsRef<str>>(&self, values: &[S]) -> Result<String, CacheError> {
        if values.len() != self.slots.len() {
            return Err(CacheError::Arity {
                expected: self.slots.len(),
                got: values.len(),
            });
        }
        let mut out = String::with_capacity(self.text.len());
        let mut cursor = 0;
        for (slot, v) in self.slots.iter().zip(values) {
            out.push_str(&self.text[cursor..slot.at]);
            out.push_str(v.as_ref());
            cursor = slot.at + slot.placeholder.len();
        }
        out.push_str(&self.text[cursor..]);
        Ok(out)
    }

    /// Reproduces the original prompt.
    pub fn restore(&self) -> String {
        let originals: Vec<&str> = self.slots.iter().map(|s| s.mention.as_str()).collect();
        self.fill(&originals).expect("slot count matches itself")
    }
}

/// Replaces each span left to right with `[PLAYERn]` or `[TEAMn]`,
/// numbering each kind separately.
pub fn redact(prompt: &str, spans: &[Span]) -> Result<RedactedQuery, CacheError> {
    let mut spans = spans.to_vec();
    spans.sort_by_key(|s| (s.start, s.end));
    for s in &spans {
        if s.start >= s.end || s.end > prompt.len() || !prompt.is_char_boundary(s.start) || !prompt.is_char_boundary(s.end) {
            return Err(CacheError::BadSpan { start: s.start, end: s.end });
        }
    }
    if let Some(w) = spans.windows(2).find(|w| w[1].start < w[0].end) {
        return Err(CacheError::Overlap {
            first: (w[0].start, w[0].end),
            second: (w[1].start, w[1].end),
        });
    }
    let (mut players, mut teams) = (0, 0);
    let mut text = String::with_capacity(prompt.len());
    let mut slots = Vec::with_capacity(spans.len());
    let mut cursor = 0;
    for s in spans {
        let n = match s.kind {
            EntityKind::Player => {
                players += 1;
                players
            }
            EntityKind::Team => {
                teams += 1;
                teams
            }
        };
        text.push_str(&prompt[cursor..s.start]);
        let placeholder = format!("[{}{n}]", tag(s.kind));
        slots.push(Slot {
            placeholder: placeholder.clone(),
            kind: s.kind,
            mention: prompt[s.start..s.end].to_string(),
            start: s.start,
            at: text.len(),
        });
        text.push_str(&placeholder);
        cursor = s.end;
    }
    text.push_str(&prompt[cursor..]);
    Ok(RedactedQuery { text, slots })
}

/// Locates each mention as a whole-word substring of `prompt`, scanning
/// left to right and never reusing text. Returns `None` if a mention is
/// missing.
pub fn locate(prompt: &str, mentions: &[(&str, EntityKind)]) -> Option<Vec<Span>> {
    let mut taken: Vec<(usize, usize)> = Vec::new();
    let mut out = Vec::with_capacity(mentions.len());
    let word = |c: Option<char>| c.is_some_and(|c| c.is_alphanumeric());
    let boundary = |i: usize| !word(prompt[..i].chars().next_back()) || !word(prompt[i..].chars().next());
    for (mention, kind) in mentions {
        if mention.is_empty() {
            return None;
        }
        let found = prompt.match_indices(mention).map(|(i, _)| (i, i + mention.len())).find(|&(s, e)| {
            boundary(s) && boundary(e) && taken.iter().all(|&(ts, te)| e <= ts || s >= te)
        })?;
        taken.push(found);
        out.push(Span {
            start: found.0,
            end: found.1,
            kind: *kind,
        });
    }
    Some(out)
}
