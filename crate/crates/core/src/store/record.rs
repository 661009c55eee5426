use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::IngestError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SeasonType {
    #[serde(rename = "REG")]
    Regular,
    #[serde(rename = "POST")]
    Post,
}

impl SeasonType {
    pub fn as_str(self) -> &'static str {
        match self {
            SeasonType::Regular => "REG",
            SeasonType::Post => "POST",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PlayType {
    Pass,
    Rush,
    Other,
}

impl PlayType {
    pub fn as_str(self) -> &'static str {
        match self {
            PlayType::Pass => "PASS",
            PlayType::Rush => "RUSH",
            PlayType::Other => "OTHER",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Formation {
    UnderCenter,
    Shotgun,
    Pistol,
    Empty,
}

impl Formation {
    pub const ALL: [Formation; 4] = [
        Formation::UnderCenter,
        Formation::Shotgun,
        Formation::Pistol,
        Formation::Empty,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Formation::UnderCenter => "UNDER_CENTER",
            Formation::Shotgun => "SHOTGUN",
            Formation::Pistol => "PISTOL",
            Formation::Empty => "EMPTY",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Direction {
    Left,
    Right,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Left => "LEFT",
            Direction::Right => "RIGHT",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alignment {
    pub edge: u8,
    pub direction: Direction,
}

/// One play. Field names match the newline-delimited dataset format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayRecord {
    pub play_id: String,
    pub game_id: String,
    pub season: i64,
    pub season_type: SeasonType,
    pub week: i64,
    pub play_type: PlayType,
    pub offense_team_id: String,
    pub defense_team_id: String,
    pub actor_nfl_id: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pass_yards: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rush_yards: Option<f64>,
    pub touchdown: u8,
    pub interception: u8,
    pub formation: Formation,
    pub defender_ids: Vec<i64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub defender_alignment: BTreeMap<i64, Alignment>,
}

impl PlayRecord {
    /// Returns the name of the first field that breaks a record invariant.
    pub fn check(&self) -> Result<(), (&'static str, String)> {
        let err = |field, msg: &str| Err((field, msg.to_string()));
        if self.play_id.is_empty() {
            return err("play_id", "empty play_id");
        }
        if self.week < 1 {
            return err("week", "week must be >= 1");
        }
        if self.touchdown > 1 {
            return err("touchdown", "touchdown must be 0 or 1");
        }
        if self.interception > 1 {
            return err("interception", "interception must be 0 or 1");
        }
        if self.interception == 1 && self.play_type != PlayType::Pass {
            return err("interception", "interception requires a PASS play");
        }
        match self.play_type {
            PlayType::Pass if self.rush_yards.is_some() => {
                return err("rush_yards", "PASS play cannot carry rush_yards")
            }
            PlayType::Rush if self.pass_yards.is_some() => {
                return err("pass_yards", "RUSH play cannot carry pass_yards")
            }
            _ => {}
        }
        for (name, v) in [("pass_yards", self.pass_yards), ("rush_yards", self.rush_yards)] {
            if let Some(v) = v {
                if !v.is_finite() || v < 0.0 {
                    return Err((name, format!("{name} must be a finite value >= 0")));
                }
            }
        }
        if let Some(id) = self
            .defender_alignment
            .keys()
            .find(|id| !self.defender_ids.contains(id))
        {
            return Err((
                "defender_alignment",
                format!("alignment for {id} who is not among defender_ids"),
            ));
        }
        Ok(())
    }
}

impl fmt::Display for PlayRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "play {}", self.play_id)
    }
}

/// Reads newline-delimited JSON play records, skipping blank lines.
pub fn read_ndjson(reader: impl BufRead) -> Result<Vec<PlayRecord>, IngestError> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(IngestError::Io)?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: PlayRecord = serde_json::from_str(&line).map_err(|source| IngestError::Parse {
            line: i + 1,
            source,
        })?;
        if !seen.insert(rec.play_id.clone()) {
            return Err(IngestError::Duplicate(rec.play_id));
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn write_ndjson<'a>(
    mut writer: impl Write,
    records: impl IntoIterator<Item = &'a PlayRecord>,
) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut writer, r)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}
