//! Maps schema field keys onto play-record attributes.
//!
//! Most schemas have one row per play. The defense schema has one row per
//! defender on the field, so `nflId` there names the defender and the
//! alignment fields describe that defender.

use crate::request::{FilterClause, Scalar};
use crate::schema::SchemaName;

use super::record::{Alignment, PlayRecord};

/// A value read from a row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldValue<'a> {
    Int(i64),
    Float(f64),
    Str(&'a str),
}

impl FieldValue<'_> {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            FieldValue::Int(i) => Some(i as f64),
            FieldValue::Float(f) => Some(f),
            FieldValue::Str(_) => None,
        }
    }

    pub fn eq_scalar(&self, s: &Scalar) -> bool {
        match (self, s) {
            (FieldValue::Str(a), Scalar::Str(b)) => *a == b,
            (FieldValue::Int(a), Scalar::Int(b)) => a == b,
            (FieldValue::Str(_), _) | (_, Scalar::Str(_)) => false,
            _ => self.as_f64() == s.as_f64(),
        }
    }
}

/// A play, or a (play, defender) pair for the defense schema.
#[derive(Debug, Clone, Copy)]
pub struct Row<'a> {
    pub play: &'a PlayRecord,
    pub defender: Option<(i64, Option<&'a Alignment>)>,
}

/// Whether the schema has one row per defender rather than one per play.
pub fn per_defender(schema: SchemaName) -> bool {
    schema == SchemaName::Defense
}

/// Enumerates the rows a play contributes to `schema`.
pub fn rows_of(schema: SchemaName, play: &PlayRecord) -> Vec<Row<'_>> {
    if per_defender(schema) {
        play.defender_ids
            .iter()
            .map(|id| Row {
                play,
                defender: Some((*id, play.defender_alignment.get(id))),
            })
            .collect()
    } else {
        vec![Row {
            play,
            defender: None,
        }]
    }
}

/// Whether `key` has a record binding in `schema`.
pub fn is_bound(schema: SchemaName, key: &str) -> bool {
    let probe = PlayRecord {
        play_id: String::new(),
        game_id: String::new(),
        season: 0,
        season_type: super::record::SeasonType::Regular,
        week: 1,
        play_type: super::record::PlayType::Other,
        offense_team_id: String::new(),
        defense_team_id: String::new(),
        actor_nfl_id: 0,
        pass_yards: None,
        rush_yards: None,
        touchdown: 0,
        interception: 0,
        formation: super::record::Formation::Shotgun,
        defender_ids: vec![],
        defender_alignment: Default::default(),
    };
    lookup(schema, key, Row { play: &probe, defender: Some((0, None)) }).is_ok()
}

/// Reads `key` from a row. `Ok(None)` means the attribute is absent on this
/// row; `Err(())` means the key has no binding in this schema.
#[allow(clippy::result_unit_err)]
pub fn lookup<'a>(schema: SchemaName, key: &str, row: Row<'a>) -> Result<Option<FieldValue<'a>>, ()> {
    use FieldValue::*;
    use SchemaName::*;
    let p = row.play;
    let offense_keyed = matches!(schema, Passing | Rushing | TeamOffense);
    let v = match key {
        "season" => Some(Int(p.season)),
        "seasonType" => Some(Str(p.season_type.as_str())),
        "week" => Some(Int(p.week)),
        "gameId" => Some(Str(&p.game_id)),
        "playType" => Some(Str(p.play_type.as_str())),
        "formation" => Some(Str(p.formation.as_str())),
        "touchdown" => Some(Int(p.touchdown as i64)),
        "interception" if schema != Rushing => Some(Int(p.interception as i64)),
        "passYards" if schema != Rushing && schema != Defense => p.pass_yards.map(Float),
        "rushYards" if schema != Passing && schema != Defense => p.rush_yards.map(Float),
        "teamId" => Some(Str(if offense_keyed {
            &p.offense_team_id
        } else {
            &p.defense_team_id
        })),
        "opponentTeamId" => Some(Str(if offense_keyed {
            &p.defense_team_id
        } else {
            &p.offense_team_id
        })),
        "nflId" => match schema {
            Passing | Rushing => Some(Int(p.actor_nfl_id)),
            Defense => row.defender.map(|(id, _)| Int(id)),
            _ => return Err(()),
        },
        "playerAlignmentEDGE" if schema == Defense => row
            .defender
            .and_then(|(_, a)| a)
            .map(|a| Int(a.edge as i64)),
        "alignmentDirection" if schema == Defense => row
            .defender
            .and_then(|(_, a)| a)
            .map(|a| Str(a.direction.as_str())),
        _ => return Err(()),
    };
    Ok(v)
}

/// Evaluates one clause on one row without consulting any index.
pub fn clause_holds(schema: SchemaName, clause: &FilterClause, row: Row<'_>) -> bool {
    let Ok(Some(v)) = lookup(schema, clause.field(), row) else {
        return false;
    };
    match clause {
        FilterClause::Term { value, .. } => v.eq_scalar(value),
        FilterClause::In { value, .. } => value.iter().any(|s| v.eq_scalar(s)),
        FilterClause::Range { value, .. } => v
            .as_f64()
            .is_some_and(|x| value.cmp.holds(x, value.bound)),
    }
}
