//! Follow-up rewriting: turns an elliptical prompt into a standalone one
//! using the previous answered turn.
//!
//! - A prompt that names an entity keeps it; if it is a bare "what about X"
//!   the previous action is appended.
//! - Pronouns are replaced by the previous subject.
//! - "What about ..." / "How about ..." become
//!   `Find all the plays where <subject> <remainder>.`, with leading
//!   determiners dropped, "that were" read as "are", and the previous action
//!   inserted when the remainder has none.
//!
//! Anything else is returned unchanged, which makes the rewrite idempotent:
//! every rewritten prompt names its subject explicitly.

use crate::directory::EntityRole;

use super::normalize::Normalizer;
use super::PriorTurn;

pub const FOLLOWUP_PREFIX: &str = "Find all the plays where";

const MARKERS: [&[&str]; 4] = [
    &["what", "about"],
    &["how", "about"],
    &["and", "what", "about"],
    &["what", "if", "we", "look", "at"],
];
const DETERMINERS: [&str; 6] = ["all", "the", "those", "these", "any", "of"];
const PRONOUNS: [&str; 8] = ["he", "him", "his", "she", "her", "they", "them", "their"];

/// The tokens after a leading follow-up marker such as "what about".
pub(crate) fn strip_marker(tokens: &[String]) -> Option<&[String]> {
    MARKERS.iter().find_map(|m| {
        (tokens.len() >= m.len() && tokens.iter().zip(m.iter()).all(|(a, b)| a == b)).then(|| &tokens[m.len()..])
    })
}

fn remainder(rest: &[String]) -> Vec<String> {
    let mut i = 0;
    while i < rest.len() && DETERMINERS.contains(&rest[i].as_str()) {
        i += 1;
    }
    let mut out: Vec<String> = Vec::new();
    let mut j = i;
    while j < rest.len() {
        let pair = rest.get(j + 1).map(String::as_str);
        if matches!(rest[j].as_str(), "that" | "which") && matches!(pair, Some("were" | "are" | "was" | "is")) {
            out.push("are".into());
            j += 2;
            continue;
        }
        out.push(rest[j].clone());
        j += 1;
    }
    out
}

/// Returns the standalone prompt and a short explanation.
pub fn rewrite_followup(norm: &Normalizer, prompt: &str, prior: &PriorTurn) -> (String, String) {
    let lex = norm.lexicon();
    let n = norm.normalize(prompt);
    let subject = prior
        .entities
        .iter()
        .find(|e| e.role == EntityRole::Actor)
        .or_else(|| prior.entities.first());
    let prior_action = prior.actions.first();
    let has_action = |toks: &[String]| {
        let refs: Vec<&str> = toks.iter().map(String::as_str).collect();
        lex.mentions_action(&refs)
    };

    if !n.names.is_empty() {
        if let (Some(rest), Some(action)) = (strip_marker(&n.tokens), prior_action) {
            let rest = remainder(rest);
            if !has_action(&rest) {
                let text = format!("{FOLLOWUP_PREFIX} {} {action}.", rest.join(" "));
                return (text, "explicit entity kept; previous action appended".into());
            }
        }
        return (prompt.to_string(), "explicit entity mention; unchanged".into());
    }
    let Some(subject) = subject else {
        return (prompt.to_string(), "no previous entity; unchanged".into());
    };

    let words: Vec<&str> = prompt.split_whitespace().collect();
    let is_pronoun = |w: &str| {
        let core = w.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase();
        PRONOUNS.contains(&core.as_str())
    };
    if words.iter().any(|w| is_pronoun(w)) {
        let replaced: Vec<String> = words
            .iter()
            .map(|w| {
                if is_pronoun(w) {
                    let start = w.find(|c: char| c.is_alphanumeric()).unwrap_or(0);
                    let end = w.rfind(|c: char| c.is_alphanumeric()).map_or(w.len(), |e| e + 1);
                    format!("{}{}{}", &w[..start], subject.mention, &w[end..])
                } else {
                    w.to_string()
                }
            })
            .collect();
        return (replaced.join(" "), format!("pronoun resolved to {}", subject.mention));
    }

    if let Some(rest) = strip_marker(&n.tokens) {
        let mut rest = remainder(rest);
        if !has_action(&rest) {
            if let Some(action) = prior_action {
                rest.insert(0, action.clone());
            }
        }
        let body = std::iter::once(subject.mention.clone())
            .chain(rest)
            .collect::<Vec<_>>()
            .join(" ");
        return (
            format!("{FOLLOWUP_PREFIX} {body}."),
            format!("elliptical follow-up inherits {}", subject.mention),
        );
    }
    (prompt.to_string(), "standalone prompt; unchanged".into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;
    use crate::directory::EntityKind;
    use crate::session::TurnEntity;
    use std::sync::Arc;

    fn setup() -> (Normalizer, PriorTurn) {
        let n = Normalizer::new(Arc::new(bundled::directory()), Arc::new(bundled::lexicon()));
        let prior = PriorTurn {
            prompt: "Find all plays where Patrick Mahomes throws a touchdown farther than 10 yards".into(),
            entities: vec![TurnEntity {
                mention: "Patrick Mahomes".into(),
                kind: EntityKind::Player,
                role: EntityRole::Actor,
            }],
            actions: vec!["touchdown throw".into()],
        };
        (n, prior)
    }

    #[test]
    fn elliptical_followup_inherits_subject() {
        let (n, prior) = setup();
        let (out, _) = rewrite_followup(&n, "What about all the throws that were intercepted?", &prior);
        assert_eq!(out, "Find all the plays where Patrick Mahomes throws are intercepted.");
        let (again, _) = rewrite_followup(&n, &out, &prior);
        assert_eq!(again, out);
    }

    #[test]
    fn missing_action_is_inherited() {
        let (n, prior) = setup();
        let (out, _) = rewrite_followup(&n, "How about in the 2021 postseason?", &prior);
        assert_eq!(out, "Find all the plays where Patrick Mahomes touchdown throw in the 2021 postseason.");
    }

    #[test]
    fn pronouns_are_replaced() {
        let (n, prior) = setup();
        let (out, _) = rewrite_followup(&n, "How many of his passes were intercepted?", &prior);
        assert_eq!(out, "How many of Patrick Mahomes passes were intercepted?");
    }

    #[test]
    fn explicit_mention_wins() {
        let (n, prior) = setup();
        let p = "How many passes did Derek Williams throw?";
        assert_eq!(rewrite_followup(&n, p, &prior).0, p);
        let (out, _) = rewrite_followup(&n, "What about Derek Williams?", &prior);
        assert_eq!(out, "Find all the plays where Derek Williams touchdown throw.");
    }

    #[test]
    fn standalone_prompt_is_unchanged() {
        let (n, prior) = setup();
        let p = "How many rushes were there in 2022?";
        assert_eq!(rewrite_followup(&n, p, &prior).0, p);
    }
}
