//! Seeded synthetic play generator.
//!
//! Marginals (approximate): 60% PASS, 35% RUSH, 5% OTHER; 35% of passes
//! incomplete; ~5% of passes and ~4% of rushes score; 2.5% of passes are
//! intercepted; formations SHOTGUN 55%, UNDER_CENTER 30%, PISTOL 10%,
//! EMPTY 5%; 7% of plays are postseason (weeks 19-22). Each play carries the
//! defending team's three listed defenders, 90% of them with an alignment.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::directory::{Directory, PlayerEntry};

use super::record::{Alignment, Direction, Formation, PlayRecord, PlayType, SeasonType};

const DEFENSIVE: [&str; 3] = ["DE", "LB", "CB"];

fn exp_sample(rng: &mut impl Rng, mean: f64) -> f64 {
    let u: f64 = rng.gen_range(f64::EPSILON..1.0);
    -u.ln() * mean
}

fn tenth(v: f64) -> f64 {
    (v * 10.0).round() / 10.0
}

/// Deterministic for a fixed `(seed, n, directory)`.
pub fn generate_synthetic(seed: u64, n: usize, directory: &Directory) -> Vec<PlayRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let teams: Vec<&str> = directory.teams.iter().map(|t| t.team_id.as_str()).collect();
    let roster = |team: &str, positions: &[&str]| -> Vec<&PlayerEntry> {
        directory
            .players
            .iter()
            .filter(|p| p.team_id == team && positions.contains(&p.position.as_str()))
            .collect()
    };
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let offense = *teams.choose(&mut rng).expect("directory has teams");
        let defense = loop {
            let d = *teams.choose(&mut rng).unwrap();
            if d != offense {
                break d;
            }
        };
        let roll: f64 = rng.gen();
        let play_type = if roll < 0.60 {
            PlayType::Pass
        } else if roll < 0.95 {
            PlayType::Rush
        } else {
            PlayType::Other
        };
        let group = match play_type {
            PlayType::Rush => roster(offense, &["RB"]),
            _ => roster(offense, &["QB"]),
        };
        let actor: &PlayerEntry = match group.choose(&mut rng) {
            Some(p) => p,
            None => directory
                .players
                .choose(&mut rng)
                .expect("directory has players"),
        };
        let season = *actor
            .active_seasons
            .choose(&mut rng)
            .unwrap_or(&2016);
        let post = rng.gen_bool(0.07);
        let (season_type, week) = if post {
            (SeasonType::Post, rng.gen_range(19..=22))
        } else {
            (SeasonType::Regular, rng.gen_range(1..=18))
        };

        let (mut pass_yards, mut rush_yards, mut touchdown, mut interception) = (None, None, 0u8, 0u8);
        match play_type {
            PlayType::Pass => {
                if rng.gen_bool(0.025) {
                    interception = 1;
                    pass_yards = Some(0.0);
                } else if rng.gen_bool(0.35) {
                    pass_yards = Some(0.0);
                } else {
                    pass_yards = Some(tenth(exp_sample(&mut rng, 9.0).min(80.0)));
                    touchdown = u8::from(rng.gen_bool(0.08));
                }
            }
            PlayType::Rush => {
                rush_yards = Some(tenth(exp_sample(&mut rng, 4.3).min(80.0)));
                touchdown = u8::from(rng.gen_bool(0.04));
            }
            PlayType::Other => {}
        }

        let f: f64 = rng.gen();
        let formation = if f < 0.55 {
            Formation::Shotgun
        } else if f < 0.85 {
            Formation::UnderCenter
        } else if f < 0.95 {
            Formation::Pistol
        } else {
            Formation::Empty
        };

        let defenders = roster(defense, &DEFENSIVE);
        let mut defender_ids = Vec::with_capacity(defenders.len());
        let mut defender_alignment = std::collections::BTreeMap::new();
        for d in defenders {
            defender_ids.push(d.nfl_id);
            if rng.gen_bool(0.9) {
                let edge_p = match d.position.as_str() {
                    "DE" => 0.7,
                    "LB" => 0.2,
                    _ => 0.0,
                };
                let edge = u8::from(rng.gen_bool(edge_p));
                let direction = if rng.gen_bool(0.5) {
                    Direction::Left
                } else {
                    Direction::Right
                };
                defender_alignment.insert(d.nfl_id, Alignment { edge, direction });
            }
        }

        let game_id = format!("{season}{week:02}{offense}{defense}");
        out.push(PlayRecord {
            play_id: format!("{game_id}-{i:06}"),
            game_id,
            season,
            season_type,
            week,
            play_type,
            offense_team_id: offense.to_string(),
            defense_team_id: defense.to_string(),
            actor_nfl_id: actor.nfl_id,
            pass_yards,
            rush_yards,
            touchdown,
            interception,
            formation,
            defender_ids,
            defender_alignment,
        });
    }
    out
}
