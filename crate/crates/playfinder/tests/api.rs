use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use playfinder::{router, AppState, DataSource, Settings};
use playfinder_core::store::PlayType;
use serde_json::{json, Value};
use tower::ServiceExt;

fn settings() -> Settings {
    Settings {
        data: DataSource::Synthetic { seed: 7, plays: 5000 },
        ..Settings::default()
    }
}

fn state() -> AppState {
    let s = settings();
    AppState {
        pipeline: Arc::new(s.ready_pipeline().unwrap()),
        settings: Arc::new(s),
    }
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<String>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, Body::from))
        .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    let value = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    (status, value)
}

async fn query(app: &Router, session: &str, prompt: &str) -> (StatusCode, Value) {
    call(
        app,
        "POST",
        "/v1/query",
        Some(json!({ "session_id": session, "prompt": prompt }).to_string()),
    )
    .await
}

fn player_id(name: &str) -> i64 {
    playfinder_core::bundled::directory()
        .players
        .iter()
        .find(|p| p.full_name == name)
        .unwrap()
        .nfl_id
}

#[tokio::test]
async fn answer_carries_count_and_links() {
    let st = state();
    let store = st.pipeline.store().unwrap();
    let app = router(st);
    let (status, body) = query(&app, "s1", "Show all pass plays by Patrick Mahomes").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["kind"], "answer");
    let id = player_id("Patrick Mahomes");
    let expected = store.brute_force_ids(|p| p.actor_nfl_id == id && p.play_type == PlayType::Pass);
    assert!(expected.len() > 50);
    assert_eq!(body["result"]["count"], expected.len());
    let links = body["media_links"]["links"].as_array().unwrap();
    assert_eq!(links.len(), 50);
    assert_eq!(body["media_links"]["truncated"], true);
    assert_eq!(body["media_links"]["total"], expected.len());
    for (link, pid) in links.iter().zip(&expected) {
        assert_eq!(link["play_id"], *pid);
        assert_eq!(link["url"], format!("https://mam.example/asset/{pid}"));
    }
    assert!(body["trace"]["trace_id"].is_string());
}

#[tokio::test]
async fn malformed_bodies_are_400() {
    let app = router(state());
    for body in ["{not json", r#"{"prompt":"hi"}"#, r#"{"session_id":"s","prompt":""}"#, r#"[1,2]"#] {
        let (status, v) = call(&app, "POST", "/v1/query", Some(body.into())).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{body}");
        assert!(v["error"].is_string());
    }
    let (status, _) = call(&app, "POST", "/v1/clarify", Some(r#"{"session_id":"s"}"#.into())).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn out_of_scope_prompt_is_a_200_rejection() {
    let app = router(state());
    let (status, body) = query(&app, "s", "What is the best recipe for lasagna?").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["kind"], "reject");
    assert!(body["message"].as_str().unwrap().contains("football"));
}

#[tokio::test]
async fn unknown_player_is_a_200_failure() {
    let app = router(state());
    let (status, body) = query(&app, "s", "How many passes did Zebulon Quagmire throw?").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["kind"], "fail");
}

#[tokio::test]
async fn clarification_round_trip() {
    let app = router(state());
    let (status, body) = query(&app, "dup", "How many passes did Josh Allen throw?").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["kind"], "clarify");
    let mut offered: Vec<i64> = body["candidates"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["nfl_id"].as_i64().unwrap())
        .collect();
    offered.sort();
    assert_eq!(offered, vec![43019, 43088]);
    let mention = body["mention"].as_str().unwrap().to_string();

    let clarify = |id: i64| Some(json!({ "session_id": "dup", "mention": mention, "chosen_id": id }).to_string());
    let (status, _) = call(&app, "POST", "/v1/clarify", clarify(43091)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);

    let (status, body) = call(&app, "POST", "/v1/clarify", clarify(43019)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["kind"], "answer");
    let clauses = body["search_request"]["clauses"].as_array().unwrap();
    assert!(clauses.contains(&json!({ "op": "term", "field": "nflId", "value": 43019 })));

    let (status, _) = call(&app, "POST", "/v1/clarify", clarify(43019)).await;
    assert_eq!(status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn clarify_without_pending_state_is_409() {
    let app = router(state());
    let body = json!({ "session_id": "nobody", "mention": "Josh Allen", "chosen_id": 43019 }).to_string();
    let (status, v) = call(&app, "POST", "/v1/clarify", Some(body)).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert!(v["error"].is_string());
}

#[tokio::test]
async fn session_inspection() {
    let app = router(state());
    let (status, _) = call(&app, "GET", "/v1/session/ghost", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    query(&app, "s2", "How many rushes did Derek Williams have in 2022?").await;
    let (_, follow) = query(&app, "s2", "What about in 2021?").await;
    assert_eq!(follow["kind"], "answer");
    let clauses = follow["search_request"]["clauses"].as_array().unwrap();
    assert!(clauses.contains(&json!({ "op": "term", "field": "nflId", "value": player_id("Derek Williams") })));
    assert!(clauses.contains(&json!({ "op": "term", "field": "season", "value": 2021 })));
    assert!(!clauses.contains(&json!({ "op": "term", "field": "season", "value": 2022 })));
    let (status, body) = call(&app, "GET", "/v1/session/s2", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["session_id"], "s2");
    let turns = body["turns"].as_array().unwrap();
    assert_eq!(turns.len(), 2);
    assert_eq!(turns[0]["kind"], "answer");
}

#[tokio::test]
async fn trace_lists_stages_in_pipeline_order() {
    let app = router(state());
    let (_, body) = query(&app, "t", "How many rushes did Derek Williams have in 2022?").await;
    let id = body["trace"]["trace_id"].as_str().unwrap().to_string();
    let (status, trace) = call(&app, "GET", &format!("/v1/trace/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    let stages: Vec<&str> = trace["stages"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["stage"].as_str().unwrap())
        .collect();
    assert_eq!(
        stages,
        [
            "INTENT",
            "DECOMPOSE",
            "RESOLVE",
            "CACHE_LOOKUP",
            "ROUTE_SCHEMA",
            "FORMULATE",
            "EXECUTE",
            "SUMMARIZE",
            "CACHE_INSERT",
            "SESSION_APPEND"
        ]
    );
    let (_, follow) = query(&app, "t", "What about in 2021?").await;
    let (_, by_session) = call(&app, "GET", "/v1/trace/t", None).await;
    assert_eq!(by_session["trace_id"], follow["trace"]["trace_id"]);
    assert_eq!(by_session["stages"][1]["stage"], "REWRITE");
    let (status, _) = call(&app, "GET", "/v1/trace/t99999999", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn health_reflects_store_readiness() {
    let s = settings();
    let pipeline = Arc::new(s.build_pipeline().unwrap());
    let app = router(AppState {
        pipeline: pipeline.clone(),
        settings: Arc::new(s.clone()),
    });
    let (status, body) = call(&app, "GET", "/healthz", None).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
    assert_eq!(body["status"], "store not ready");

    let (status, body) = query(&app, "early", "How many rushes did Derek Williams have?").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["kind"], "fail");

    let store = s.load_store(pipeline.registry().clone(), pipeline.directory()).unwrap().unwrap();
    pipeline.set_store(Arc::new(store));
    let (status, body) = call(&app, "GET", "/healthz", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["plays"], 5000);
}

/// Zeroes wall-clock durations so two runs can be compared.
fn without_timings(mut v: Value) -> Value {
    if let Some(stages) = v["trace"]["stages"].as_array_mut() {
        for s in stages {
            s["duration_us"] = json!(0);
        }
    }
    v
}

#[tokio::test]
async fn responses_are_reproducible() {
    let prompts = [
        "Find all plays where Patrick Mahomes throws a touchdown farther than 10 yards in 2022",
        "What about all the throws that were intercepted?",
        "How many defensive snaps did Josh Allen play?",
        "Show all offensive plays by the Buffalo Bills out of the shotgun",
    ];
    let mut runs = Vec::new();
    for _ in 0..2 {
        let app = router(state());
        let mut out = Vec::new();
        for p in prompts {
            out.push(without_timings(query(&app, "g", p).await.1));
        }
        runs.push(out);
    }
    assert_eq!(runs[0], runs[1]);
}

#[tokio::test]
async fn endpoints_never_mutate_the_store() {
    let st = state();
    let store = st.pipeline.store().unwrap();
    let before = serde_json::to_string(store.records()).unwrap();
    let app = router(st.clone());
    query(&app, "m", "How many passes did Patrick Mahomes throw in 2022?").await;
    query(&app, "m", "What about in 2021?").await;
    query(&app, "m", "How many passes did Josh Allen throw?").await;
    call(&app, "GET", "/v1/session/m", None).await;
    call(&app, "GET", "/v1/trace/m", None).await;
    let after = st.pipeline.store().unwrap();
    assert!(Arc::ptr_eq(&store, &after));
    assert_eq!(serde_json::to_string(after.records()).unwrap(), before);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_sessions() {
    let app = router(state());
    let mut handles = Vec::new();
    for i in 0..16 {
        let app = app.clone();
        handles.push(tokio::spawn(async move {
            let session = format!("c{i}");
            let (status, body) = query(&app, &session, "How many rushes did Derek Williams have?").await;
            (status, body["result"]["count"].clone())
        }));
    }
    let mut counts = Vec::new();
    for h in handles {
        let (status, count) = h.await.unwrap();
        assert_eq!(status, StatusCode::OK);
        counts.push(count);
    }
    assert!(counts.windows(2).all(|w| w[0] == w[1]));
}

#[tokio::test]
async fn custom_link_template() {
    let s = Settings {
        mam_url_template: "https://assets.test/v/{play_id}.mp4".into(),
        max_links: 3,
        ..settings()
    };
    let app = router(AppState {
        pipeline: Arc::new(s.ready_pipeline().unwrap()),
        settings: Arc::new(s),
    });
    let (_, body) = query(&app, "l", "Show all pass plays by Patrick Mahomes").await;
    let links = body["media_links"]["links"].as_array().unwrap();
    assert_eq!(links.len(), 3);
    let url = links[0]["url"].as_str().unwrap();
    assert!(url.starts_with("https://assets.test/v/") && url.ends_with(".mp4"));
}
