//! Synthetic QA suites written in the grammar lexicon's own vocabulary.
//!
//! Each question is generated from a [`QuestionSpec`] that knows three
//! things independently of the compiler: its prompt text, the request it
//! should compile to, and a predicate over raw play records. Suite building
//! counts every expected request twice (index-free plan evaluation and the
//! spec's own predicate) and refuses to emit a pair on disagreement.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::directory::{Directory, PlayerEntry, TeamEntry};
use crate::request::{Cmp, FilterClause, QueryPlan, SearchRequest};
use crate::schema::SchemaName;
use crate::store::{plan_matches, Direction, Formation, PlayRecord, PlayStore, PlayType, SeasonType};

use super::{Complexity, EvalError, QAPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Pass,
    TouchdownThrow,
    Interception,
    Rush,
    RushingTouchdown,
    DefensiveSnap,
    OffensivePlay,
    PlayAllowed,
}

impl Action {
    fn schema(self) -> SchemaName {
        match self {
            Action::Pass | Action::TouchdownThrow | Action::Interception => SchemaName::Passing,
            Action::Rush | Action::RushingTouchdown => SchemaName::Rushing,
            Action::DefensiveSnap => SchemaName::Defense,
            Action::OffensivePlay => SchemaName::TeamOffense,
            Action::PlayAllowed => SchemaName::TeamDefense,
        }
    }

    fn clauses(self) -> Vec<FilterClause> {
        let pass = FilterClause::term("playType", "PASS");
        let rush = FilterClause::term("playType", "RUSH");
        match self {
            Action::Pass => vec![pass],
            Action::TouchdownThrow => vec![pass, FilterClause::term("touchdown", 1)],
            Action::Interception => vec![pass, FilterClause::term("interception", 1)],
            Action::Rush => vec![rush],
            Action::RushingTouchdown => vec![rush, FilterClause::term("touchdown", 1)],
            Action::DefensiveSnap | Action::OffensivePlay | Action::PlayAllowed => vec![],
        }
    }

    fn holds(self, p: &PlayRecord) -> bool {
        match self {
            Action::Pass => p.play_type == PlayType::Pass,
            Action::TouchdownThrow => p.play_type == PlayType::Pass && p.touchdown == 1,
            Action::Interception => p.play_type == PlayType::Pass && p.interception == 1,
            Action::Rush => p.play_type == PlayType::Rush,
            Action::RushingTouchdown => p.play_type == PlayType::Rush && p.touchdown == 1,
            Action::DefensiveSnap | Action::OffensivePlay | Action::PlayAllowed => true,
        }
    }

    fn scores(self) -> bool {
        matches!(self, Action::TouchdownThrow | Action::RushingTouchdown)
    }

    fn yards_field(self) -> Option<&'static str> {
        match self.schema() {
            SchemaName::Passing => Some("passYards"),
            SchemaName::Rushing => Some("rushYards"),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Subject {
    Player(PlayerEntry),
    Team(TeamEntry),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Condition {
    Season(i64),
    SeasonType(SeasonType),
    Week(i64),
    Yards(Cmp, i64),
    Formation(Formation),
    Edge(u8),
    Side(Direction),
    Opponent(TeamEntry),
    Touchdown(u8),
    /// A defender aligned on the edge, from the defense schema.
    AgainstEdgeDefender,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuestionSpec {
    pub subject: Subject,
    pub action: Action,
    pub conditions: Vec<Condition>,
    pub complexity: Complexity,
    /// Index into the phrasing list of the action.
    pub phrasing: usize,
}

fn yards_phrase(cmp: Cmp, n: i64, variant: usize) -> String {
    let options: &[&str] = match cmp {
        Cmp::Gt => &["farther than {} yards", "for more than {} yards", "longer than {} yards"],
        Cmp::Gte => &["of at least {} yards", "for {} or more yards"],
        Cmp::Lt => &["shorter than {} yards", "for less than {} yards"],
        Cmp::Lte => &["for at most {} yards", "of no more than {} yards"],
    };
    options[variant % options.len()].replace("{}", &n.to_string())
}

impl Condition {
    fn phrase(&self, variant: usize) -> String {
        match self {
            Condition::Season(y) => [format!("in {y}"), format!("during the {y} season")][variant % 2].clone(),
            Condition::SeasonType(SeasonType::Regular) => ["in the regular season", "during the regular season"][variant % 2].into(),
            Condition::SeasonType(SeasonType::Post) => ["in the playoffs", "during the postseason"][variant % 2].into(),
            Condition::Week(w) => format!("in week {w}"),
            Condition::Yards(cmp, n) => yards_phrase(*cmp, *n, variant),
            Condition::Formation(f) => match f {
                Formation::UnderCenter => "from under center",
                Formation::Shotgun => "out of the shotgun",
                Formation::Pistol => "from the pistol",
                Formation::Empty => "out of an empty backfield",
            }
            .into(),
            Condition::Edge(1) => "on the edge".into(),
            Condition::Edge(_) => "off the edge".into(),
            Condition::Side(Direction::Left) => "on the left side".into(),
            Condition::Side(Direction::Right) => "on the right side".into(),
            Condition::Opponent(t) => format!("against the {}", t.name),
            Condition::Touchdown(1) => "for a touchdown".into(),
            Condition::Touchdown(_) => "that did not score".into(),
            Condition::AgainstEdgeDefender => "against an edge defender".into(),
        }
    }

    fn clause(&self, action: Action) -> Option<FilterClause> {
        Some(match self {
            Condition::Season(y) => FilterClause::term("season", *y),
            Condition::SeasonType(t) => FilterClause::term("seasonType", t.as_str()),
            Condition::Week(w) => FilterClause::term("week", *w),
            Condition::Yards(cmp, n) => FilterClause::range(action.yards_field()?, *cmp, *n as f64),
            Condition::Formation(f) => FilterClause::term("formation", f.as_str()),
            Condition::Edge(e) => FilterClause::term("playerAlignmentEDGE", i64::from(*e)),
            Condition::Side(d) => FilterClause::term("alignmentDirection", d.as_str()),
            Condition::Opponent(t) => FilterClause::term("opponentTeamId", t.team_id.as_str()),
            Condition::Touchdown(v) => FilterClause::term("touchdown", i64::from(*v)),
            Condition::AgainstEdgeDefender => return None,
        })
    }
}

fn edge_defender_on(p: &PlayRecord) -> bool {
    p.defender_ids
        .iter()
        .any(|id| p.defender_alignment.get(id).is_some_and(|a| a.edge == 1))
}

impl QuestionSpec {
    pub fn prompt(&self) -> String {
        let conds: Vec<String> = self
            .conditions
            .iter()
            .enumerate()
            .map(|(i, c)| c.phrase(self.phrasing + i))
            .collect();
        let tail = if conds.is_empty() {
            String::new()
        } else {
            format!(" {}", conds.join(" "))
        };
        let who = match &self.subject {
            Subject::Player(p) => p.full_name.clone(),
            Subject::Team(t) => format!("the {}", t.name),
        };
        let forms: &[&str] = match self.action {
            Action::Pass => &["How many passes did {W} throw{C}?", "Show all pass plays by {W}{C}", "Find all plays where {W} throws{C}"],
            Action::TouchdownThrow => &["How many touchdown passes did {W} throw{C}?", "Find all plays where {W} throws a touchdown{C}"],
            Action::Interception => &["How many interceptions did {W} throw{C}?", "Show interceptions thrown by {W}{C}"],
            Action::Rush => &["How many rushes did {W} have{C}?", "Show all runs by {W}{C}"],
            Action::RushingTouchdown => &["How many rushing touchdowns did {W} have{C}?", "Find all plays where {W} ran for a touchdown{C}"],
            Action::DefensiveSnap => &["How many defensive snaps did {W} play{C}?", "Show all plays where {W} lined up{C}"],
            Action::OffensivePlay => &["Show all offensive plays by {W}{C}", "How many offensive plays did {W} have{C}?"],
            Action::PlayAllowed => &["How many plays allowed by {W}{C}?", "Show all plays allowed by {W}{C}"],
        };
        forms[self.phrasing % forms.len()].replace("{W}", &who).replace("{C}", &tail)
    }

    pub fn expected_request(&self) -> QueryPlan {
        let primary = self.action.schema();
        let mut clauses = self.action.clauses();
        clauses.push(match &self.subject {
            Subject::Player(p) => FilterClause::term("nflId", p.nfl_id),
            Subject::Team(t) => FilterClause::term("teamId", t.team_id.as_str()),
        });
        clauses.extend(self.conditions.iter().filter_map(|c| c.clause(self.action)));
        let mut requests = vec![SearchRequest::new(primary, clauses)];
        if self.conditions.contains(&Condition::AgainstEdgeDefender) {
            requests.push(SearchRequest::new(
                SchemaName::Defense,
                vec![FilterClause::term("playerAlignmentEDGE", 1)],
            ));
        }
        QueryPlan::new(requests).canonical()
    }

    /// The question's meaning evaluated directly on a record.
    pub fn holds(&self, p: &PlayRecord) -> bool {
        let subject = match (&self.subject, self.action) {
            (Subject::Player(pl), Action::DefensiveSnap) => p.defender_ids.contains(&pl.nfl_id),
            (Subject::Player(pl), _) => p.actor_nfl_id == pl.nfl_id,
            (Subject::Team(t), Action::PlayAllowed) => p.defense_team_id == t.team_id,
            (Subject::Team(t), _) => p.offense_team_id == t.team_id,
        };
        if !subject || !self.action.holds(p) {
            return false;
        }
        let defender = match &self.subject {
            Subject::Player(pl) if self.action == Action::DefensiveSnap => p.defender_alignment.get(&pl.nfl_id),
            _ => None,
        };
        let yards = match self.action.schema() {
            SchemaName::Passing => p.pass_yards,
            _ => p.rush_yards,
        };
        self.conditions.iter().all(|c| match c {
            Condition::Season(y) => p.season == *y,
            Condition::SeasonType(t) => p.season_type == *t,
            Condition::Week(w) => p.week == *w,
            Condition::Yards(cmp, n) => yards.is_some_and(|v| cmp.holds(v, *n as f64)),
            Condition::Formation(f) => p.formation == *f,
            Condition::Edge(e) => defender.is_some_and(|a| a.edge == *e),
            Condition::Side(d) => defender.is_some_and(|a| a.direction == *d),
            Condition::Opponent(t) => match self.action {
                Action::PlayAllowed => p.offense_team_id == t.team_id,
                _ => p.defense_team_id == t.team_id,
            },
            Condition::Touchdown(v) => p.touchdown == *v,
            Condition::AgainstEdgeDefender => edge_defender_on(p),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteConfig {
    pub size: usize,
    pub seed: u64,
    /// Fractions of easy and medium questions; the rest are difficult.
    pub easy: f64,
    pub medium: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            size: 100,
            seed: 2024,
            easy: 0.30,
            medium: 0.50,
        }
    }
}

impl SuiteConfig {
    pub fn counts(&self) -> [(Complexity, usize); 3] {
        let easy = (self.size as f64 * self.easy).round() as usize;
        let medium = ((self.size as f64 * self.medium).round() as usize).min(self.size - easy.min(self.size));
        let easy = easy.min(self.size);
        [
            (Complexity::Easy, easy),
            (Complexity::Medium, medium),
            (Complexity::Difficult, self.size - easy - medium),
        ]
    }
}

struct Pools<'a> {
    qbs: Vec<&'a PlayerEntry>,
    rbs: Vec<&'a PlayerEntry>,
    defenders: Vec<&'a PlayerEntry>,
    teams: Vec<&'a TeamEntry>,
}

impl<'a> Pools<'a> {
    /// Players whose full name is unique, so no question needs clarifying.
    fn new(dir: &'a Directory) -> Result<Self, EvalError> {
        let unique = |p: &&PlayerEntry| {
            dir.players.iter().filter(|q| q.full_name == p.full_name).count() == 1
                && dir.players.iter().filter(|q| q.surname == p.surname).count() == 1
        };
        let of = |positions: &[&str]| -> Vec<&'a PlayerEntry> {
            dir.players
                .iter()
                .filter(|p| positions.contains(&p.position.as_str()))
                .filter(unique)
                .collect()
        };
        let pools = Self {
            qbs: of(&["QB"]),
            rbs: of(&["RB"]),
            defenders: of(&["DE", "LB", "CB"]),
            teams: dir.teams.iter().collect(),
        };
        if pools.qbs.is_empty() || pools.rbs.is_empty() || pools.defenders.is_empty() || pools.teams.is_empty() {
            return Err(EvalError::Generation(
                "directory lacks uniquely named players for some position group".into(),
            ));
        }
        Ok(pools)
    }
}

fn season_of(rng: &mut ChaCha8Rng, subject: &Subject) -> i64 {
    match subject {
        Subject::Player(p) => *p.active_seasons.choose(rng).unwrap_or(&2022),
        Subject::Team(_) => rng.gen_range(2018..=2024),
    }
}

fn context(rng: &mut ChaCha8Rng, subject: &Subject) -> Condition {
    match rng.gen_range(0..4) {
        0 | 1 => Condition::Season(season_of(rng, subject)),
        2 => Condition::SeasonType(if rng.gen_bool(0.7) { SeasonType::Regular } else { SeasonType::Post }),
        _ => Condition::Week(rng.gen_range(1..=18)),
    }
}

fn yards(rng: &mut ChaCha8Rng) -> Condition {
    let cmp = *[Cmp::Gt, Cmp::Gt, Cmp::Gte, Cmp::Lt, Cmp::Lte].choose(rng).unwrap();
    Condition::Yards(cmp, *[5, 10, 15, 20, 25, 30].choose(rng).unwrap())
}

fn formation(rng: &mut ChaCha8Rng) -> Condition {
    Condition::Formation(*Formation::ALL.choose(rng).unwrap())
}

/// Adds a condition unless one of the same kind is already present.
fn push_distinct(conds: &mut Vec<Condition>, c: Condition) {
    let same = |a: &Condition| std::mem::discriminant(a) == std::mem::discriminant(&c);
    if !conds.iter().any(same) {
        conds.push(c);
    }
}

fn spec(rng: &mut ChaCha8Rng, pools: &Pools, complexity: Complexity) -> QuestionSpec {
    let player = |rng: &mut ChaCha8Rng, pool: &[&PlayerEntry]| Subject::Player((*pool.choose(rng).unwrap()).clone());
    let team = |rng: &mut ChaCha8Rng| Subject::Team((*pools.teams.choose(rng).unwrap()).clone());
    let (subject, action, mut conditions) = match complexity {
        Complexity::Easy => {
            let (subject, action) = match rng.gen_range(0..5) {
                0 => (player(rng, &pools.qbs), Action::Pass),
                1 => (player(rng, &pools.rbs), Action::Rush),
                2 => (player(rng, &pools.defenders), Action::DefensiveSnap),
                3 => (team(rng), Action::OffensivePlay),
                _ => (team(rng), Action::PlayAllowed),
            };
            let mut conds = Vec::new();
            for _ in 0..rng.gen_range(0..=2) {
                push_distinct(&mut conds, context(rng, &subject));
            }
            (subject, action, conds)
        }
        Complexity::Medium => {
            let (subject, action) = match rng.gen_range(0..5) {
                0 => (player(rng, &pools.qbs), Action::TouchdownThrow),
                1 => (player(rng, &pools.qbs), Action::Interception),
                2 => (player(rng, &pools.qbs), Action::Pass),
                3 => (player(rng, &pools.rbs), Action::Rush),
                _ => (player(rng, &pools.rbs), Action::RushingTouchdown),
            };
            let mut conds = Vec::new();
            if action != Action::Interception {
                push_distinct(&mut conds, yards(rng));
            } else {
                push_distinct(&mut conds, context(rng, &subject));
            }
            if matches!(action, Action::Pass | Action::Rush) && rng.gen_bool(0.3) {
                push_distinct(&mut conds, Condition::Touchdown(u8::from(rng.gen_bool(0.5))));
            }
            push_distinct(&mut conds, context(rng, &subject));
            (subject, action, conds)
        }
        Complexity::Difficult => match rng.gen_range(0..5) {
            0 => {
                let s = player(rng, &pools.qbs);
                let action = *[Action::Pass, Action::TouchdownThrow].choose(rng).unwrap();
                let mut conds = vec![yards(rng), formation(rng)];
                push_distinct(&mut conds, context(rng, &s));
                (s, action, conds)
            }
            1 => {
                let s = player(rng, &pools.qbs);
                let mut conds = vec![Condition::AgainstEdgeDefender];
                push_distinct(&mut conds, context(rng, &s));
                (s, Action::Pass, conds)
            }
            2 => {
                let s = player(rng, &pools.defenders);
                let mut conds = vec![Condition::Edge(u8::from(rng.gen_bool(0.5)))];
                if rng.gen_bool(0.5) {
                    conds.push(Condition::Side(if rng.gen_bool(0.5) { Direction::Left } else { Direction::Right }));
                }
                push_distinct(&mut conds, context(rng, &s));
                (s, Action::DefensiveSnap, conds)
            }
            3 => {
                let s = player(rng, &pools.rbs);
                let Subject::Player(p) = &s else { unreachable!() };
                let opponent = loop {
                    let t = *pools.teams.choose(rng).unwrap();
                    if t.team_id != p.team_id {
                        break t.clone();
                    }
                };
                let mut conds = vec![yards(rng), Condition::Opponent(opponent)];
                push_distinct(&mut conds, context(rng, &s));
                (s, Action::Rush, conds)
            }
            _ => {
                let s = team(rng);
                let action = *[Action::OffensivePlay, Action::PlayAllowed].choose(rng).unwrap();
                let mut conds = vec![formation(rng)];
                push_distinct(&mut conds, context(rng, &s));
                push_distinct(&mut conds, context(rng, &s));
                (s, action, conds)
            }
        },
    };
    if action.scores() {
        conditions.retain(|c| !matches!(c, Condition::Touchdown(_)));
    }
    QuestionSpec {
        subject,
        action,
        conditions,
        complexity,
        phrasing: rng.gen_range(0..6),
    }
}

/// Redraws allowed per question while looking for one with a nonzero answer.
const DRAWS: usize = 40;

/// Builds a suite; every expected count is computed by two oracles that
/// must agree. Questions are redrawn a bounded number of times so that
/// most of them match at least one play.
pub fn build_suite(config: &SuiteConfig, store: &PlayStore, directory: &Directory) -> Result<Vec<QAPair>, EvalError> {
    generate(config, directory, |s| store.brute_force_count(|p| s.holds(p)) > 0)?
        .iter()
        .map(|s| pair_for(s, store))
        .collect()
}

/// Questions alone, without looking at any data.
pub fn build_specs(config: &SuiteConfig, directory: &Directory) -> Result<Vec<QuestionSpec>, EvalError> {
    generate(config, directory, |_| true)
}

fn generate(
    config: &SuiteConfig,
    directory: &Directory,
    mut accept: impl FnMut(&QuestionSpec) -> bool,
) -> Result<Vec<QuestionSpec>, EvalError> {
    if config.size == 0 {
        return Ok(Vec::new());
    }
    let pools = Pools::new(directory)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut specs = Vec::with_capacity(config.size);
    for (complexity, n) in config.counts() {
        for _ in 0..n {
            let mut s = spec(&mut rng, &pools, complexity);
            for _ in 1..DRAWS {
                if accept(&s) {
                    break;
                }
                s = spec(&mut rng, &pools, complexity);
            }
            specs.push(s);
        }
    }
    Ok(specs)
}

pub fn pair_for(spec: &QuestionSpec, store: &PlayStore) -> Result<QAPair, EvalError> {
    let plan = spec.expected_request();
    plan.check(store.registry())
        .map_err(|e| EvalError::Generation(format!("'{}' has an invalid expected request: {e}", spec.prompt())))?;
    let by_plan = store.brute_force_count(|p| plan_matches(&plan, p));
    let by_spec = store.brute_force_count(|p| spec.holds(p));
    if by_plan != by_spec {
        return Err(EvalError::OracleMismatch {
            query: spec.prompt(),
            plan: by_plan,
            native: by_spec,
        });
    }
    Ok(QAPair {
        query: spec.prompt(),
        expected_request: plan,
        expected_count: by_plan,
        complexity: spec.complexity,
    })
}

/// Phrasings outside the lexicon, used to measure how the pipeline
/// degrades on unseen wording.
const PARAPHRASES: [&str; 4] = [
    "How often did {W} sling it downfield{C}?",
    "Tally every snap where {W} aired it out{C}",
    "Dig up each time {W} chucked the pigskin{C}",
    "Which snaps saw {W} uncork a deep ball{C}?",
];

/// Rewrites `fraction` of the pairs (at least one if the fraction is
/// positive) with wording the lexicon does not cover, keeping their
/// expected answers. Returns the indices rewritten.
pub fn inject_paraphrases(suite: &mut [QAPair], fraction: f64, seed: u64) -> Vec<usize> {
    let n = ((suite.len() as f64) * fraction).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx: Vec<usize> = (0..suite.len()).collect();
    idx.shuffle(&mut rng);
    idx.truncate(n);
    idx.sort_unstable();
    for (k, &i) in idx.iter().enumerate() {
        let who = subject_of(&suite[i].query);
        suite[i].query = PARAPHRASES[k % PARAPHRASES.len()].replace("{W}", &who).replace("{C}", "");
    }
    idx
}

fn subject_of(query: &str) -> String {
    let caps: Vec<&str> = query
        .split_whitespace()
        .skip(1)
        .map(|w| w.trim_end_matches(['?', ',', '.']))
        .filter(|w| w.chars().next().is_some_and(char::is_uppercase))
        .collect();
    if caps.is_empty() {
        "the team".into()
    } else {
        caps.join(" ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;
    use std::sync::Arc;

    fn store() -> PlayStore {
        let dir = bundled::directory();
        PlayStore::ingest(crate::store::generate_synthetic(3, 2000, &dir), Arc::new(bundled::registry())).unwrap()
    }

    #[test]
    fn default_mix_is_thirty_fifty_twenty() {
        let c = SuiteConfig::default();
        assert_eq!(
            c.counts(),
            [(Complexity::Easy, 30), (Complexity::Medium, 50), (Complexity::Difficult, 20)]
        );
        let suite = build_suite(&c, &store(), &bundled::directory()).unwrap();
        assert_eq!(suite.len(), 100);
        assert_eq!(suite.iter().filter(|p| p.complexity == Complexity::Easy).count(), 30);
        assert_eq!(suite.iter().filter(|p| p.complexity == Complexity::Difficult).count(), 20);
    }

    #[test]
    fn empty_suite() {
        let c = SuiteConfig {
            size: 0,
            ..SuiteConfig::default()
        };
        assert!(build_suite(&c, &store(), &bundled::directory()).unwrap().is_empty());
    }

    #[test]
    fn ambiguous_names_are_never_used() {
        let specs = build_specs(&SuiteConfig { size: 300, ..Default::default() }, &bundled::directory()).unwrap();
        assert!(specs.iter().all(|s| !s.prompt().contains("Josh Allen")));
    }

    #[test]
    fn table_style_prompt() {
        let dir = bundled::directory();
        let mahomes = dir.players.iter().find(|p| p.full_name == "Patrick Mahomes").unwrap().clone();
        let s = QuestionSpec {
            subject: Subject::Player(mahomes),
            action: Action::TouchdownThrow,
            conditions: vec![
                Condition::Yards(Cmp::Gt, 10),
                Condition::Season(2022),
                Condition::SeasonType(SeasonType::Regular),
            ],
            complexity: Complexity::Medium,
            phrasing: 0,
        };
        assert_eq!(
            s.prompt(),
            "How many touchdown passes did Patrick Mahomes throw farther than 10 yards during the 2022 season in the regular season?"
        );
        assert_eq!(
            s.expected_request().canonical_json(),
            r#"{"schema":"passing","clauses":[{"op":"term","field":"nflId","value":43091},{"op":"range","field":"passYards","value":{"cmp":"gt","bound":10.0}},{"op":"term","field":"playType","value":"PASS"},{"op":"term","field":"season","value":2022},{"op":"term","field":"seasonType","value":"REG"},{"op":"term","field":"touchdown","value":1}]}"#
        );
    }

    #[test]
    fn paraphrase_injection_count() {
        let store = store();
        let mut suite = build_suite(&SuiteConfig::default(), &store, &bundled::directory()).unwrap();
        let before = suite.clone();
        let idx = inject_paraphrases(&mut suite, 0.05, 1);
        assert_eq!(idx.len(), 5);
        for (i, (a, b)) in before.iter().zip(&suite).enumerate() {
            assert_eq!(a.query != b.query, idx.contains(&i));
            assert_eq!(a.expected_request, b.expected_request);
        }
    }
}
