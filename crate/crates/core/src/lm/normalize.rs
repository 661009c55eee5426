//! Prompt preprocessing shared by every backend.
//!
//! 1. Possessive suffixes are dropped and every character other than a
//!    letter, a digit, or a decimal point between digits becomes a space.
//! 2. Directory names are found by longest match, starting at capitalized
//!    tokens (or exact aliases such as "49ers"), and keep their case. A
//!    single-token team match must be an exact alias, so "No" never reads
//!    as the New Orleans abbreviation.
//! 3. All other tokens are lowercased if they are lexicon vocabulary or the
//!    first token; remaining capitalized words keep their case so the
//!    grammar can report them as unknown names.
//! 4. Tokens are joined by single spaces.

use std::sync::Arc;

use crate::directory::{Directory, EntityKind};

use super::lexicon::Lexicon;

/// A normalized prompt with its directory name spans (token ranges).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalized {
    pub tokens: Vec<String>,
    pub names: Vec<NameSpan>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NameSpan {
    pub start: usize,
    pub len: usize,
    pub kind: EntityKind,
}

impl Normalized {
    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }

    pub fn name_at(&self, i: usize) -> Option<NameSpan> {
        self.names.iter().copied().find(|n| n.start == i)
    }

    pub fn mention(&self, span: NameSpan) -> String {
        self.tokens[span.start..span.start + span.len].join(" ")
    }
}

#[derive(Debug, Clone)]
pub struct Normalizer {
    directory: Arc<Directory>,
    lexicon: Arc<Lexicon>,
}

fn strip_possessive(word: &str) -> &str {
    for suffix in ["'s", "’s", "'S", "'", "’"] {
        if let Some(w) = word.strip_suffix(suffix) {
            return w;
        }
    }
    word
}

/// Step 1: punctuation and possessives.
pub fn clean(prompt: &str) -> Vec<String> {
    let mut out = Vec::new();
    for raw in prompt.split_whitespace() {
        let trimmed = raw.trim_end_matches(|c: char| !c.is_alphanumeric() && c != '\'' && c != '’');
        let word = strip_possessive(trimmed);
        let chars: Vec<char> = word.chars().collect();
        let mut cur = String::new();
        for (i, &c) in chars.iter().enumerate() {
            let decimal_point = c == '.'
                && i > 0
                && chars[i - 1].is_ascii_digit()
                && chars.get(i + 1).is_some_and(|n| n.is_ascii_digit());
            if c.is_alphanumeric() || decimal_point {
                cur.push(c);
            } else if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
        }
        if !cur.is_empty() {
            out.push(cur);
        }
    }
    out
}

fn capitalized(tok: &str) -> bool {
    tok.chars().next().is_some_and(char::is_uppercase)
}

impl Normalizer {
    pub fn new(directory: Arc<Directory>, lexicon: Arc<Lexicon>) -> Self {
        Self { directory, lexicon }
    }

    pub fn directory(&self) -> &Directory {
        &self.directory
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn normalize(&self, prompt: &str) -> Normalized {
        let raw = clean(prompt);
        let refs: Vec<&str> = raw.iter().map(String::as_str).collect();
        let mut tokens = Vec::with_capacity(raw.len());
        let mut names = Vec::new();
        let mut i = 0;
        while i < refs.len() {
            if let Some((len, kind)) = self.name_at(&refs[i..]) {
                names.push(NameSpan { start: i, len, kind });
                tokens.extend(raw[i..i + len].iter().cloned());
                i += len;
                continue;
            }
            let lower = raw[i].to_lowercase();
            if i == 0 || self.lexicon.is_vocabulary(&lower) || !capitalized(&raw[i]) {
                tokens.push(lower);
            } else {
                tokens.push(raw[i].clone());
            }
            i += 1;
        }
        Normalized { tokens, names }
    }

    fn name_at(&self, toks: &[&str]) -> Option<(usize, EntityKind)> {
        let first = toks[0];
        if !capitalized(first) && !self.directory.is_exact_alias(first) {
            return None;
        }
        let (len, kind) = self.directory.longest_match(toks)?;
        if len == 1 && kind == EntityKind::Team && !self.directory.is_exact_alias(first) {
            return None;
        }
        Some((len, kind))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;

    fn norm() -> Normalizer {
        Normalizer::new(Arc::new(bundled::directory()), Arc::new(bundled::lexicon()))
    }

    #[test]
    fn cleans_punctuation_and_possessives() {
        assert_eq!(clean("Mahomes's 10.5-yard passes, ok?"), ["Mahomes", "10.5", "yard", "passes", "ok"]);
        assert_eq!(clean("What's up."), ["What", "up"]);
        assert!(clean("  ?! ").is_empty());
    }

    #[test]
    fn keeps_name_case_and_lowercases_vocabulary() {
        let n = norm().normalize("Find all plays where Patrick Mahomes throws a touchdown from Under Center!");
        assert_eq!(
            n.text(),
            "find all plays where Patrick Mahomes throws a touchdown from under center"
        );
        assert_eq!(n.names.len(), 1);
        assert_eq!(n.mention(n.names[0]), "Patrick Mahomes");
    }

    #[test]
    fn team_aliases_need_exact_case() {
        let n = norm().normalize("No passes against the 49ers or KC or the Kansas City Chiefs");
        let kinds: Vec<String> = n.names.iter().map(|s| n.mention(*s)).collect();
        assert_eq!(kinds, ["49ers", "KC", "Kansas City Chiefs"]);
        assert_eq!(n.tokens[0], "no");
    }

    #[test]
    fn unknown_capitalized_words_keep_case() {
        let n = norm().normalize("Show plays by Zzyzx");
        assert_eq!(n.text(), "show plays by Zzyzx");
        assert!(n.names.is_empty());
    }

    #[test]
    fn normalization_is_idempotent() {
        let n = norm();
        let once = n.normalize("How many passes did Josh Allen throw during the 2022 Regular Season?").text();
        assert_eq!(n.normalize(&once).text(), once);
    }
}
