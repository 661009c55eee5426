//! Template answers for the grammar backend.

use crate::directory::{Directory, EntityId};
use crate::request::{FilterClause, QueryPlan, Scalar};
use crate::schema::fmt_num;

use super::Decomposition;

fn player_name(id: i64, d: &Decomposition, dir: &Directory) -> String {
    d.entities
        .iter()
        .find(|e| e.resolved_id == Some(EntityId::Player(id)))
        .map(|e| e.mention.clone())
        .or_else(|| dir.player(id).map(|p| p.full_name.clone()))
        .unwrap_or_else(|| format!("player {id}"))
}

fn team_name(id: &str, dir: &Directory) -> String {
    dir.team(id).map_or_else(|| id.to_string(), |t| t.name.clone())
}

fn words(s: &str) -> String {
    s.to_lowercase().replace('_', " ")
}

fn describe(c: &FilterClause, d: &Decomposition, dir: &Directory) -> String {
    use FilterClause::*;
    match c {
        Term { field, value } => match (field.as_str(), value) {
            ("nflId", Scalar::Int(id)) => player_name(*id, d, dir),
            ("teamId", Scalar::Str(t)) => team_name(t, dir),
            ("opponentTeamId", Scalar::Str(t)) => format!("against the {}", team_name(t, dir)),
            ("playType", Scalar::Str(t)) => format!("{} plays", words(t)),
            ("touchdown", v) if v.as_f64() == Some(1.0) => "a touchdown".into(),
            ("touchdown", _) => "no touchdown".into(),
            ("interception", v) if v.as_f64() == Some(1.0) => "an interception".into(),
            ("interception", _) => "no interception".into(),
            ("season", v) => format!("the {v} season"),
            ("seasonType", Scalar::Str(s)) if s == "POST" => "the postseason".into(),
            ("seasonType", _) => "the regular season".into(),
            ("week", v) => format!("week {v}"),
            ("formation", Scalar::Str(f)) => format!("{} formation", words(f)),
            ("playerAlignmentEDGE", v) if v.as_f64() == Some(1.0) => "a defender aligned on the edge".into(),
            ("playerAlignmentEDGE", _) => "a defender aligned off the edge".into(),
            ("alignmentDirection", Scalar::Str(s)) => format!("a defender on the {} side", words(s)),
            ("gameId", v) => format!("game {v}"),
            _ => c.to_string(),
        },
        Range { field, value } => {
            let what = match field.as_str() {
                "passYards" => "pass yards",
                "rushYards" => "rush yards",
                other => other,
            };
            format!("{what} {} {}", value.cmp.symbol(), fmt_num(value.bound))
        }
        In { .. } => c.to_string(),
    }
}

fn join(parts: &[String]) -> String {
    match parts {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

/// "Found 12 plays matching ...", "Found 1 play matching ...", or
/// "No plays matched ...".
pub fn summarize(plan: &QueryPlan, count: usize, d: &Decomposition, dir: &Directory) -> String {
    let parts: Vec<String> = plan.clauses().map(|(_, c)| describe(c, d, dir)).collect();
    let filters = join(&parts);
    match (count, filters.is_empty()) {
        (0, true) => "No plays matched.".into(),
        (0, false) => format!("No plays matched {filters}."),
        (1, true) => "Found 1 play.".into(),
        (1, false) => format!("Found 1 play matching {filters}."),
        (n, true) => format!("Found {n} plays."),
        (n, false) => format!("Found {n} plays matching {filters}."),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;
    use crate::request::{Cmp, SearchRequest};
    use crate::schema::SchemaName;

    fn plan() -> QueryPlan {
        QueryPlan::single(SearchRequest::new(
            SchemaName::Passing,
            vec![
                FilterClause::term("touchdown", 1),
                FilterClause::range("passYards", Cmp::Gt, 10.0),
                FilterClause::term("nflId", 43091),
            ],
        ))
        .canonical()
    }

    #[test]
    fn renders_count_and_conditions() {
        let dir = bundled::directory();
        let d = Decomposition::default();
        let s = summarize(&plan(), 12, &d, &dir);
        assert_eq!(s, "Found 12 plays matching Patrick Mahomes, pass yards > 10 and a touchdown.");
        assert!(summarize(&plan(), 1, &d, &dir).starts_with("Found 1 play matching"));
        assert!(summarize(&plan(), 0, &d, &dir).starts_with("No plays matched"));
    }
}
