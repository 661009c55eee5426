//! Player and team name resolution.
//!
//! Matching is case-insensitive with no fuzzy matching. An exact full-name
//! match is preferred over a surname match; a name shared by several players
//! is ambiguous unless the session already holds a confirmed binding for it.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::session::Session;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerEntry {
    pub nfl_id: i64,
    pub full_name: String,
    pub surname: String,
    pub position: String,
    pub team_id: String,
    pub active_seasons: Vec<i64>,
}

impl PlayerEntry {
    pub fn latest_season(&self) -> i64 {
        self.active_seasons.iter().copied().max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TeamEntry {
    pub team_id: String,
    pub name: String,
    pub abbrev: String,
}

impl TeamEntry {
    /// The last word of the full name, e.g. "Chiefs".
    pub fn nickname(&self) -> &str {
        self.name.rsplit(' ').next().unwrap_or(&self.name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    Player,
    Team,
}

/// How an entity participates in a query: the subject, or the opposing team.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityRole {
    #[default]
    Actor,
    Opponent,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EntityId {
    Player(i64),
    Team(String),
}

impl EntityId {
    pub fn kind(&self) -> EntityKind {
        match self {
            EntityId::Player(_) => EntityKind::Player,
            EntityId::Team(_) => EntityKind::Team,
        }
    }
}

impl std::fmt::Display for EntityId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EntityId::Player(id) => write!(f, "{id}"),
            EntityId::Team(t) => f.write_str(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ResolutionOutcome {
    Resolved { id: EntityId },
    Ambiguous { candidates: Vec<PlayerEntry> },
    NotFound,
}

#[derive(Debug, Error)]
pub enum DirectoryError {
    #[error("cannot read directory file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed directory file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid directory: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BindingError {
    #[error("no pending clarification for '{0}'")]
    NoPending(String),
    #[error("{id} is not an offered candidate for '{name}'")]
    NotOffered { name: String, id: i64 },
}

#[derive(Debug, Deserialize)]
struct DirectoryFile {
    #[serde(default)]
    version: u32,
    players: Vec<PlayerEntry>,
    teams: Vec<TeamEntry>,
}

/// Read-only after load.
#[derive(Debug, Clone)]
pub struct Directory {
    pub version: u32,
    pub players: Vec<PlayerEntry>,
    pub teams: Vec<TeamEntry>,
    by_full: BTreeMap<String, Vec<usize>>,
    by_surname: BTreeMap<String, Vec<usize>>,
    team_alias: BTreeMap<String, usize>,
}

fn key(s: &str) -> String {
    s.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

impl Directory {
    pub fn from_json(text: &str) -> Result<Self, DirectoryError> {
        let file: DirectoryFile = serde_json::from_str(text)?;
        Self::new(file.version, file.players, file.teams)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DirectoryError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn new(version: u32, players: Vec<PlayerEntry>, teams: Vec<TeamEntry>) -> Result<Self, DirectoryError> {
        let mut by_full: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        let mut by_surname: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        let mut ids = std::collections::HashSet::new();
        for (i, p) in players.iter().enumerate() {
            if !ids.insert(p.nfl_id) {
                return Err(DirectoryError::Invalid(format!("duplicate nfl_id {}", p.nfl_id)));
            }
            if p.full_name.split_whitespace().last() != Some(p.surname.as_str()) {
                return Err(DirectoryError::Invalid(format!(
                    "surname '{}' is not the last token of '{}'",
                    p.surname, p.full_name
                )));
            }
            by_full.entry(key(&p.full_name)).or_default().push(i);
            by_surname.entry(key(&p.surname)).or_default().push(i);
        }
        let mut team_alias = BTreeMap::new();
        for (i, t) in teams.iter().enumerate() {
            for alias in [t.name.as_str(), t.abbrev.as_str(), t.nickname(), t.team_id.as_str()] {
                if let Some(prev) = team_alias.insert(key(alias), i) {
                    if prev != i {
                        return Err(DirectoryError::Invalid(format!("team alias '{alias}' is not unique")));
                    }
                }
            }
        }
        Ok(Self {
            version,
            players,
            teams,
            by_full,
            by_surname,
            team_alias,
        })
    }

    pub fn player(&self, nfl_id: i64) -> Option<&PlayerEntry> {
        self.players.iter().find(|p| p.nfl_id == nfl_id)
    }

    pub fn team(&self, team_id: &str) -> Option<&TeamEntry> {
        self.teams.iter().find(|t| t.team_id == team_id)
    }

    /// Players whose surname is shared with at least one other player.
    pub fn duplicate_surnames(&self) -> Vec<(&str, Vec<&PlayerEntry>)> {
        self.by_surname
            .iter()
            .filter(|(_, v)| v.len() > 1)
            .map(|(_, v)| {
                let players: Vec<&PlayerEntry> = v.iter().map(|i| &self.players[*i]).collect();
                (players[0].surname.as_str(), players)
            })
            .collect()
    }

    /// Whether `name` names a player (full name or surname) or a team alias.
    pub fn classify(&self, name: &str) -> Option<crate::directory::EntityKind> {
        let k = key(name);
        if self.by_full.contains_key(&k) || self.by_surname.contains_key(&k) {
            Some(EntityKind::Player)
        } else if self.team_alias.contains_key(&k) {
            Some(EntityKind::Team)
        } else {
            None
        }
    }

    pub fn resolve_player(&self, name: &str, session: &Session) -> ResolutionOutcome {
        let k = key(name);
        if let Some(id) = session.binding(&k) {
            return ResolutionOutcome::Resolved {
                id: EntityId::Player(id),
            };
        }
        let hits = self
            .by_full
            .get(&k)
            .or_else(|| self.by_surname.get(&k))
            .cloned()
            .unwrap_or_default();
        match hits.len() {
            0 => ResolutionOutcome::NotFound,
            1 => ResolutionOutcome::Resolved {
                id: EntityId::Player(self.players[hits[0]].nfl_id),
            },
            _ => {
                let mut candidates: Vec<PlayerEntry> =
                    hits.iter().map(|i| self.players[*i].clone()).collect();
                candidates.sort_by(|a, b| {
                    b.latest_season()
                        .cmp(&a.latest_season())
                        .then(a.nfl_id.cmp(&b.nfl_id))
                });
                ResolutionOutcome::Ambiguous { candidates }
            }
        }
    }

    pub fn resolve_team(&self, name_or_abbrev: &str) -> ResolutionOutcome {
        match self.team_alias.get(&key(name_or_abbrev)) {
            Some(i) => ResolutionOutcome::Resolved {
                id: EntityId::Team(self.teams[*i].team_id.clone()),
            },
            None => ResolutionOutcome::NotFound,
        }
    }

    /// Length in tokens of the longest directory name starting at
    /// `tokens[0]`, with the kind of entity it names.
    pub fn longest_match(&self, tokens: &[&str]) -> Option<(usize, EntityKind)> {
        (1..=tokens.len().min(4)).rev().find_map(|n| {
            let candidate = tokens[..n].join(" ");
            self.classify(&candidate).map(|k| (n, k))
        })
    }

    /// Every alias exactly as written in the directory (used to recognise
    /// names that do not start with a capital letter, such as "49ers").
    pub fn is_exact_alias(&self, token: &str) -> bool {
        self.teams
            .iter()
            .any(|t| t.nickname() == token || t.abbrev == token)
    }
}

/// Records the user's choice for an ambiguous name offered in this session.
pub fn confirm_binding(session: &mut Session, name: &str, nfl_id: i64) -> Result<(), BindingError> {
    let k = key(name);
    let pending = session
        .pending_clarification
        .as_ref()
        .filter(|p| key(&p.mention) == k)
        .ok_or_else(|| BindingError::NoPending(name.to_string()))?;
    if !pending.offered.contains(&nfl_id) {
        return Err(BindingError::NotOffered {
            name: name.to_string(),
            id: nfl_id,
        });
    }
    session.bind(k, nfl_id);
    Ok(())
}
