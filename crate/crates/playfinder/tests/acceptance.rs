//! End-to-end acceptance checks. Prints one PASS or FAIL line per
//! criterion and exits non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use playfinder::{router, AppState, Settings};
use playfinder_core::bundled;
use playfinder_core::cache::{embed, locate, redact, SemanticCache};
use playfinder_core::directory::{Directory, EntityKind, PlayerEntry};
use playfinder_core::eval::suite::{Condition, Subject};
use playfinder_core::eval::{self, build_specs, build_suite, inject_paraphrases, Complexity, SuiteConfig};
use playfinder_core::lm::{GrammarBackend, LmBackend, LmError, LmOutcome, LmResult, LmTask, PriorTurn};
use playfinder_core::pipeline::{Pipeline, Stage, MAX_ATTEMPTS};
use playfinder_core::request::{Cmp, FilterClause, QueryPlan, Scalar, SearchRequest};
use playfinder_core::schema::{FieldKind, SchemaName};
use playfinder_core::session::ResponseKind;
use playfinder_core::store::{generate_synthetic, plan_matches, PlayStore};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use tower::ServiceExt;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

struct Fixture {
    store: Arc<PlayStore>,
    directory: Arc<Directory>,
}

impl Fixture {
    fn new() -> Self {
        let directory = Arc::new(bundled::directory());
        let plays = generate_synthetic(7, 5000, &directory);
        let store = Arc::new(PlayStore::ingest(plays, Arc::new(bundled::registry())).unwrap());
        Self { store, directory }
    }

    fn pipeline_with(&self, backend: Arc<dyn LmBackend>) -> Pipeline {
        Pipeline::new(
            self.store.registry().clone(),
            self.directory.clone(),
            Arc::new(bundled::lexicon()),
            backend,
        )
        .with_store(self.store.clone())
    }

    fn pipeline(&self) -> Pipeline {
        self.pipeline_with(Arc::new(bundled::grammar_backend()))
    }

    fn player(&self, name: &str) -> &PlayerEntry {
        self.directory.players.iter().find(|p| p.full_name == name).unwrap()
    }

    /// Players of a position whose full name and surname are unique.
    fn unique(&self, position: &str) -> Vec<&PlayerEntry> {
        let d = &self.directory;
        d.players
            .iter()
            .filter(|p| p.position == position)
            .filter(|p| d.players.iter().filter(|q| q.full_name == p.full_name).count() == 1)
            .filter(|p| d.players.iter().filter(|q| q.surname == p.surname).count() == 1)
            .collect()
    }
}

fn random_clause(rng: &mut ChaCha8Rng, store: &PlayStore, schema: SchemaName, key: &str) -> FilterClause {
    let spec = store.registry().get(schema).unwrap().field(key).unwrap().clone();
    let plays = store.records();
    let pick = |rng: &mut ChaCha8Rng| -> Scalar {
        let p = plays.choose(rng).unwrap();
        match key {
            "nflId" if schema == SchemaName::Defense => match p.defender_ids.choose(rng) {
                Some(id) => Scalar::Int(*id),
                None => Scalar::Int(p.actor_nfl_id),
            },
            "nflId" => Scalar::Int(p.actor_nfl_id),
            "gameId" => Scalar::Str(p.game_id.clone()),
            _ => spec.legal_values().unwrap().choose(rng).unwrap().clone(),
        }
    };
    match spec.kind {
        FieldKind::Range => {
            let cmp = *[Cmp::Gt, Cmp::Gte, Cmp::Lt, Cmp::Lte].choose(rng).unwrap();
            FilterClause::range(key, cmp, f64::from(rng.gen_range(0..60)) / 2.0)
        }
        FieldKind::OneOfList if rng.gen_bool(0.3) => {
            let n = rng.gen_range(1..=3);
            FilterClause::one_of(key, (0..n).map(|_| pick(rng)).collect())
        }
        _ => FilterClause::term(key, pick(rng)),
    }
}

fn random_request(rng: &mut ChaCha8Rng, store: &PlayStore) -> SearchRequest {
    let schema = *SchemaName::ALL.choose(rng).unwrap();
    let keys: Vec<String> = store.registry().get(schema).unwrap().field_keys().map(String::from).collect();
    let k = rng.gen_range(1..=4);
    let clauses = keys
        .choose_multiple(rng, k)
        .map(|key| random_clause(rng, store, schema, key))
        .collect();
    SearchRequest::new(schema, clauses)
}

fn oracle_equivalence(fx: &Fixture) -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (mut checked, mut nonzero, mut multi) = (0, 0, 0);
    while checked < 1000 {
        let mut requests = vec![random_request(&mut rng, &fx.store)];
        if rng.gen_bool(0.1) {
            requests.push(random_request(&mut rng, &fx.store));
        }
        let plan = QueryPlan::new(requests);
        if plan.check(fx.store.registry()).is_err() {
            continue;
        }
        let indexed = fx.store.execute_plan(&plan).map_err(|e| format!("{}: {e:?}", plan.canonical_json()))?;
        let scanned = fx.store.brute_force_ids(|p| plan_matches(&plan, p));
        ensure!(
            indexed.count == scanned.len() && indexed.play_ids == scanned,
            "{} indexed {} vs scan {}",
            plan.canonical_json(),
            indexed.count,
            scanned.len()
        );
        checked += 1;
        nonzero += usize::from(indexed.count > 0);
        multi += usize::from(plan.requests.len() > 1);
    }
    let secs = started.elapsed().as_secs_f64();
    ensure!(secs < 60.0, "took {secs:.1}s");
    ensure!(nonzero >= 200, "only {nonzero} requests matched anything");
    Ok(format!("1000 requests ({nonzero} non-empty, {multi} multi-schema) agree in {secs:.2}s"))
}

fn pipeline_accuracy(fx: &Fixture) -> Outcome {
    let suite = build_suite(&SuiteConfig::default(), &fx.store, &fx.directory).map_err(|e| e.to_string())?;
    let mix: Vec<usize> = Complexity::ALL
        .iter()
        .map(|c| suite.iter().filter(|p| p.complexity == *c).count())
        .collect();
    ensure!(suite.len() == 100 && mix == [30, 50, 20], "suite mix {mix:?}");
    let report = eval::run(&fx.pipeline(), &suite).map_err(|e| e.to_string())?;
    ensure!(report.accuracy == Some(1.0), "lexicon suite:\n{}", report.render_table());

    let mut paraphrased = suite.clone();
    let changed = inject_paraphrases(&mut paraphrased, 0.05, 5);
    let report = eval::run(&fx.pipeline(), &paraphrased).map_err(|e| e.to_string())?;
    ensure!(changed.len() == 5, "{} pairs paraphrased", changed.len());
    ensure!(report.accuracy == Some(0.95), "paraphrased suite:\n{}", report.render_table());
    ensure!(
        changed.iter().all(|&i| !report.results[i].correct),
        "a paraphrased pair scored correct"
    );
    Ok("100/100 on the lexicon suite (30/50/20), 95/100 with 5% paraphrases".into())
}

fn cache_hit_equivalence(fx: &Fixture) -> Outcome {
    let qbs = fx.unique("QB");
    let rbs = fx.unique("RB");
    let des = fx.unique("DE");
    let teams: Vec<&str> = fx.directory.teams.iter().map(|t| t.name.as_str()).collect();
    type Fill = fn(&[&str]) -> String;
    let templates: Vec<(&str, Vec<&[&PlayerEntry]>, usize, Fill)> = vec![
        ("rb", vec![&rbs], 0, |v| format!("Show rushes by {} in week 3", v[0])),
        ("qb", vec![&qbs], 0, |v| format!("How many passes did {} throw in 2022?", v[0])),
        ("qb", vec![&qbs], 0, |v| format!("Find all plays where {} throws a touchdown farther than 10 yards", v[0])),
        ("qb", vec![&qbs], 0, |v| format!("How many interceptions did {} throw in the playoffs?", v[0])),
        ("rb", vec![&rbs], 0, |v| format!("How many rushing touchdowns did {} have?", v[0])),
        ("de", vec![&des], 0, |v| format!("How many defensive snaps did {} play on the edge?", v[0])),
        ("qb", vec![&qbs], 0, |v| format!("How many passes did {} throw from under center in the regular season?", v[0])),
        ("team", vec![], 1, |v| format!("Show all offensive plays by the {} out of the shotgun", v[0])),
        ("team", vec![], 1, |v| format!("How many plays allowed by the {} in week 5?", v[0])),
        ("rb+team", vec![&rbs], 1, |v| format!("How many rushes did {} have against the {}?", v[0], v[1])),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let cached = fx.pipeline().with_cache(Arc::new(SemanticCache::default()));
    let (mut perms, mut hit_stages, mut miss_stages) = (0, 0, 0);
    for (t, (_, pools, n_teams, fill)) in templates.iter().enumerate() {
        // Six distinct entity tuples: the first seeds the cache, five hit it.
        let mut tuples: Vec<Vec<String>> = Vec::new();
        while tuples.len() < 6 {
            let mut v: Vec<String> = pools.iter().map(|p| p.choose(&mut rng).unwrap().full_name.clone()).collect();
            v.extend((0..*n_teams).map(|_| teams.choose(&mut rng).unwrap().to_string()));
            if !tuples.contains(&v) {
                tuples.push(v);
            }
        }
        for (i, tuple) in tuples.iter().enumerate() {
            let refs: Vec<&str> = tuple.iter().map(String::as_str).collect();
            let prompt = fill(&refs);
            let session = format!("t{t}-{i}");
            let via_cache = cached.handle(&session, &prompt);
            ensure!(via_cache.kind() == ResponseKind::Answer, "'{prompt}': {:?}", via_cache.body);
            if i == 0 {
                ensure!(via_cache.trace.has(Stage::Formulate), "'{prompt}' hit an empty cache");
                continue;
            }
            let fresh = fx.pipeline().handle(&session, &prompt);
            ensure!(fresh.trace.has(Stage::Formulate), "fresh run of '{prompt}' skipped formulation");
            ensure!(via_cache.trace.cache_hit(), "'{prompt}' missed the cache");
            ensure!(!via_cache.trace.has(Stage::Formulate), "'{prompt}' formulated on a hit");
            let (a, b) = (via_cache.search_request().unwrap(), fresh.search_request().unwrap());
            ensure!(
                a.canonical_json() == b.canonical_json(),
                "'{prompt}': cached {} vs fresh {}",
                a.canonical_json(),
                b.canonical_json()
            );
            ensure!(
                via_cache.result().unwrap().play_ids == fresh.result().unwrap().play_ids,
                "'{prompt}': play ids differ"
            );
            let (h, m) = (via_cache.trace.stages.len(), fresh.trace.stages.len());
            ensure!(h < m, "'{prompt}': hit path has {h} stages, miss path {m}");
            hit_stages += h;
            miss_stages += m;
            perms += 1;
        }
    }
    ensure!(perms == 50, "{perms} permutations");
    Ok(format!(
        "50 permutations identical; stages per query {:.1} on hits vs {:.1} on misses",
        hit_stages as f64 / 50.0,
        miss_stages as f64 / 50.0
    ))
}

/// Formulates with the last character of every range field replaced by
/// 'z'; repairs through the grammar, or by echoing the broken request.
struct Scripted {
    inner: GrammarBackend,
    echo_repair: bool,
    repair_errors: std::sync::Mutex<Vec<String>>,
}

impl LmBackend for Scripted {
    fn name(&self) -> &str {
        "scripted"
    }

    fn complete(&self, task: &LmTask) -> Result<LmOutcome, LmError> {
        match task {
            LmTask::Formulate { .. } => {
                let mut plan = self.inner.complete(task)?.into_request()?;
                for c in plan.clauses_mut() {
                    if let FilterClause::Range { field, .. } = c {
                        field.replace_range(field.len() - 1.., "z");
                    }
                }
                Ok(LmOutcome::new(LmResult::Request(plan), "corrupted"))
            }
            LmTask::Repair { failed, error, .. } => {
                self.repair_errors.lock().unwrap().push(error.clone());
                if self.echo_repair {
                    Ok(LmOutcome::new(LmResult::Request(failed.clone().unwrap()), "echo"))
                } else {
                    self.inner.complete(task)
                }
            }
            other => self.inner.complete(other),
        }
    }
}

fn repair_loop_bound(fx: &Fixture) -> Outcome {
    let prompt = "How many passes did Patrick Mahomes throw farther than 10 yards?";
    let scripted = |echo_repair| {
        Arc::new(Scripted {
            inner: bundled::grammar_backend(),
            echo_repair,
            repair_errors: Default::default(),
        })
    };

    let honest = scripted(false);
    let r = fx.pipeline_with(honest.clone()).handle("a", prompt);
    ensure!(r.kind() == ResponseKind::Answer, "honest repair gave {:?}", r.body);
    ensure!(r.trace.attempts() == 2, "answered on attempt {}", r.trace.attempts());
    let errors = honest.repair_errors.lock().unwrap().clone();
    ensure!(
        errors.len() == 1 && errors[0].contains("unknown field 'passYardz'"),
        "repair saw {errors:?}"
    );
    let fresh = fx.pipeline().handle("f", prompt);
    ensure!(r.search_request() == fresh.search_request(), "repaired request differs from a clean one");

    let echo = scripted(true);
    let r = fx.pipeline_with(echo.clone()).handle("b", prompt);
    let executes = r.trace.stages.iter().filter(|s| s.stage == Stage::Execute).count();
    ensure!(r.kind() == ResponseKind::Fail, "unrepairable request gave {:?}", r.body);
    ensure!(executes == MAX_ATTEMPTS as usize && executes == 3, "{executes} executions");
    ensure!(r.trace.attempts() == 3, "attempts {}", r.trace.attempts());
    ensure!(echo.repair_errors.lock().unwrap().len() == 2, "repairs requested");
    Ok("corruption repaired on attempt 2; unrepairable request fails after exactly 3".into())
}

async fn post(app: &axum::Router, uri: &str, body: Value) -> (StatusCode, Value) {
    let req = Request::post(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

fn disambiguation(fx: &Fixture) -> Outcome {
    let mut expected: Vec<i64> = fx
        .directory
        .players
        .iter()
        .filter(|p| p.full_name == "Josh Allen")
        .map(|p| p.nfl_id)
        .collect();
    expected.sort();
    ensure!(expected.len() == 2, "directory has {} Josh Allens", expected.len());
    let state = AppState {
        pipeline: Arc::new(fx.pipeline()),
        settings: Arc::new(Settings::default()),
    };
    let app = router(state);
    let rt = tokio::runtime::Runtime::new().unwrap();
    rt.block_on(async {
        let (status, body) = post(
            &app,
            "/v1/query",
            json!({ "session_id": "d", "prompt": "How many passes did Josh Allen throw in 2022?" }),
        )
        .await;
        ensure!(status == StatusCode::OK && body["kind"] == "clarify", "{status} {body}");
        let mut offered: Vec<i64> = body["candidates"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| c["nfl_id"].as_i64().unwrap())
            .collect();
        offered.sort();
        ensure!(offered == expected, "offered {offered:?}");
        let mention = body["mention"].clone();

        let outsider = fx.player("Patrick Mahomes").nfl_id;
        let (status, _) = post(
            &app,
            "/v1/clarify",
            json!({ "session_id": "d", "mention": mention, "chosen_id": outsider }),
        )
        .await;
        ensure!(status == StatusCode::UNPROCESSABLE_ENTITY, "unoffered id gave {status}");

        let chosen = expected[0];
        let (status, body) = post(
            &app,
            "/v1/clarify",
            json!({ "session_id": "d", "mention": mention, "chosen_id": chosen }),
        )
        .await;
        ensure!(status == StatusCode::OK && body["kind"] == "answer", "{status} {body}");
        let actor: Vec<&Value> = body["search_request"]["clauses"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|c| c["field"] == "nflId")
            .collect();
        ensure!(
            actor.len() == 1 && actor[0]["value"] == chosen,
            "actor clauses {actor:?}"
        );
        Ok(format!("CLARIFY offered {offered:?}; {chosen} answered; unoffered id got 422"))
    })
}

fn followup_rewrite(fx: &Fixture) -> Outcome {
    let p = fx.pipeline();
    let first = p.handle("f", "Find all plays where Patrick Mahomes throws a touchdown farther than 10 yards");
    ensure!(first.kind() == ResponseKind::Answer, "{:?}", first.body);
    let second = p.handle("f", "What about all the throws that were intercepted?");
    ensure!(second.kind() == ResponseKind::Answer, "{:?}", second.body);
    ensure!(second.trace.has(Stage::Rewrite), "no REWRITE stage");
    let mahomes = fx.player("Patrick Mahomes").nfl_id;
    let plan = second.search_request().unwrap();
    let clauses: Vec<&FilterClause> = plan.clauses().map(|(_, c)| c).collect();
    ensure!(
        clauses.contains(&&FilterClause::term("nflId", mahomes)),
        "no actor clause in {}",
        plan.canonical_json()
    );
    ensure!(
        clauses.contains(&&FilterClause::term("interception", 1)),
        "no interception clause in {}",
        plan.canonical_json()
    );

    let session = p.sessions().get("f").unwrap();
    let (prior, turn) = (&session.turns()[0], &session.turns()[1]);
    let rewritten = turn.rewritten.clone();
    ensure!(rewritten.contains("Patrick Mahomes"), "rewritten: {rewritten}");
    let again = bundled::grammar_backend()
        .complete(&LmTask::RewriteFollowup {
            prompt: rewritten.clone(),
            prior: PriorTurn {
                prompt: prior.rewritten.clone(),
                entities: prior.entities.clone(),
                actions: prior.actions.clone(),
            },
        })
        .and_then(|o| o.into_rewritten())
        .map_err(|e| e.to_string())?;
    ensure!(again == rewritten, "not idempotent: '{rewritten}' became '{again}'");
    let standalone = fx.pipeline().handle("g", &rewritten);
    ensure!(
        standalone.search_request() == second.search_request(),
        "the rewritten prompt alone compiles differently"
    );
    Ok(format!("rewritten to '{rewritten}'; idempotent"))
}

fn redaction_and_embedding(fx: &Fixture) -> Outcome {
    let specs = build_specs(
        &SuiteConfig {
            size: 1000,
            seed: 1000,
            ..SuiteConfig::default()
        },
        &fx.directory,
    )
    .map_err(|e| e.to_string())?;
    for s in &specs {
        let prompt = s.prompt();
        let mut mentions: Vec<(&str, EntityKind)> = vec![match &s.subject {
            Subject::Player(p) => (p.full_name.as_str(), EntityKind::Player),
            Subject::Team(t) => (t.name.as_str(), EntityKind::Team),
        }];
        for c in &s.conditions {
            if let Condition::Opponent(t) = c {
                mentions.push((t.name.as_str(), EntityKind::Team));
            }
        }
        let spans = locate(&prompt, &mentions).ok_or_else(|| format!("cannot locate mentions in '{prompt}'"))?;
        let r = redact(&prompt, &spans).map_err(|e| e.to_string())?;
        let originals: Vec<&str> = r.slots.iter().map(|x| x.mention.as_str()).collect();
        let filled = r.fill(&originals).map_err(|e| e.to_string())?;
        ensure!(filled == prompt, "'{prompt}' came back as '{filled}'");
        ensure!(
            mentions.iter().all(|(m, _)| !r.text.contains(m)),
            "mention left in '{}'",
            r.text
        );
    }

    let texts = [
        "find all plays where [PLAYER1] throws a touchdown farther than 10 yards",
        "how many plays allowed by the [TEAM1] in week 5",
        "how many rushes did [PLAYER1] have against the [TEAM1]",
    ];
    let bin = env!("CARGO_BIN_EXE_playfinder");
    let run = |text: &str| -> Result<String, String> {
        let out = Command::new(bin).args(["embed", "--text", text]).output().map_err(|e| e.to_string())?;
        ensure!(out.status.success(), "embed exited with {}", out.status);
        Ok(String::from_utf8_lossy(&out.stdout).trim().to_string())
    };
    for text in texts {
        let (a, b) = (run(text)?, run(text)?);
        let local: String = embed(text)
            .map_err(|e| e.to_string())?
            .to_bytes()
            .iter()
            .map(|x| format!("{x:02x}"))
            .collect();
        ensure!(a == b && a == local, "embedding of '{text}' differs between processes");
    }
    Ok("1000 prompts round-trip; embeddings byte-identical across 2 processes".into())
}

fn main() {
    let fx = Fixture::new();
    let criteria: [(&str, fn(&Fixture) -> Outcome); 7] = [
        ("oracle equivalence", oracle_equivalence),
        ("end-to-end pipeline accuracy", pipeline_accuracy),
        ("cache-hit equivalence", cache_hit_equivalence),
        ("repair-loop bound", repair_loop_bound),
        ("disambiguation flow", disambiguation),
        ("follow-up rewrite", followup_rewrite),
        ("redaction round-trip and embedding determinism", redaction_and_embedding),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(|| check(&fx)))
            .unwrap_or_else(|p| Err(format!("panicked: {}", panic_text(&*p))));
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn panic_text(p: &(dyn std::any::Any + Send)) -> String {
    p.downcast_ref::<String>()
        .cloned()
        .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_else(|| "unknown panic".into())
}
