mod common;

use common::{pipeline, player_id};
use playfinder_core::pipeline::{ResponseBody, Stage};
use playfinder_core::request::{Cmp, FilterClause, QueryPlan, SearchRequest};
use playfinder_core::schema::SchemaName;
use playfinder_core::session::ResponseKind;
use playfinder_core::store::PlayType;

#[test]
fn touchdown_example_matches_oracle() {
    let p = pipeline();
    let mahomes = player_id("Patrick Mahomes");
    let r = p.handle("s1", "Find all plays where Patrick Mahomes throws a touchdown farther than 10 yards");
    let expected = QueryPlan::single(SearchRequest::new(
        SchemaName::Passing,
        vec![
            FilterClause::term("playType", "PASS"),
            FilterClause::term("touchdown", 1),
            FilterClause::range("passYards", Cmp::Gt, 10.0),
            FilterClause::term("nflId", mahomes),
        ],
    ));
    assert_eq!(r.search_request().unwrap().canonical_json(), expected.canonical_json());
    let oracle = p.store().unwrap().brute_force_ids(|play| {
        play.play_type == PlayType::Pass
            && play.touchdown == 1
            && play.pass_yards.is_some_and(|y| y > 10.0)
            && play.actor_nfl_id == mahomes
    });
    assert!(!oracle.is_empty());
    assert_eq!(r.result().unwrap().play_ids, oracle);
    let ResponseBody::Answer { text, media_links, .. } = &r.body else { unreachable!() };
    assert!(text.contains(&oracle.len().to_string()), "{text}");
    assert_eq!(media_links.total, oracle.len());
    assert_eq!(r.trace.attempts(), 1);
}

#[test]
fn out_of_scope_is_rejected_without_other_stages() {
    let p = pipeline();
    let r = p.handle("s", "Best lasagna near me?");
    assert_eq!(r.kind(), ResponseKind::Reject);
    assert_eq!(r.trace.stage_names(), [Stage::Intent, Stage::SessionAppend]);
}

#[test]
fn unknown_name_fails_with_rephrase() {
    let p = pipeline();
    let r = p.handle("s", "How many passes did Zebulon Quarterbacksworth throw?");
    let ResponseBody::Fail { message } = &r.body else { panic!("{:?}", r.body) };
    assert!(message.contains("rephrase"), "{message}");
}

#[test]
fn unparseable_prompt_fails() {
    let p = pipeline();
    let r = p.handle("s", "Find plays where the referee sneezed");
    assert_eq!(r.kind(), ResponseKind::Fail);
}

#[test]
fn duplicate_name_clarifies_then_answers() {
    let p = pipeline();
    let r = p.handle("c", "How many passes did Josh Allen throw in 2022?");
    let ResponseBody::Clarify { candidates, mention, .. } = &r.body else { panic!("{:?}", r.body) };
    assert_eq!(mention, "Josh Allen");
    let mut ids: Vec<i64> = candidates.iter().map(|c| c.nfl_id).collect();
    ids.sort();
    assert_eq!(ids, [43019, 43088]);
    assert!(p.sessions().get("c").unwrap().pending_clarification.is_some());

    let err = p.handle_clarification("c", "Josh Allen", 43091).unwrap_err();
    assert_eq!(err.status(), 422);

    let r = p.handle_clarification("c", "Josh Allen", 43019).unwrap();
    let plan = r.search_request().unwrap();
    assert!(plan.clauses().any(|(_, c)| *c == FilterClause::term("nflId", 43019)));
    let s = p.sessions().get("c").unwrap();
    assert!(s.pending_clarification.is_none());
    assert_eq!(s.binding("josh allen"), Some(43019));

    // The binding sticks for later turns in the same session.
    let r = p.handle("c", "How many passes did Josh Allen throw in 2021?");
    assert_eq!(r.kind(), ResponseKind::Answer);
    assert_eq!(p.handle_clarification("c", "Josh Allen", 43019).unwrap_err().status(), 409);
}

#[test]
fn clarify_without_pending_is_conflict() {
    let p = pipeline();
    assert_eq!(p.handle_clarification("nobody", "Josh Allen", 43019).unwrap_err().status(), 409);
}

#[test]
fn followup_inherits_player_and_adds_interception() {
    let p = pipeline();
    let mahomes = player_id("Patrick Mahomes");
    let first = p.handle("f", "Find all plays where Patrick Mahomes throws a touchdown farther than 10 yards");
    assert_eq!(first.kind(), ResponseKind::Answer);
    let r = p.handle("f", "What about all the throws that were intercepted?");
    let plan = r.search_request().unwrap_or_else(|| panic!("{:?}", r.body));
    assert!(plan.clauses().any(|(_, c)| *c == FilterClause::term("nflId", mahomes)));
    assert!(plan.clauses().any(|(_, c)| *c == FilterClause::term("interception", 1)));
    let turns = p.sessions().get("f").unwrap().turns().to_vec();
    assert_eq!(turns[1].rewritten, "Find all the plays where Patrick Mahomes throws are intercepted.");
}

#[test]
fn cache_hit_skips_routing_and_formulation() {
    let p = pipeline();
    let miss = p.handle("a", "Show rushes by Derek Williams in week 3");
    assert_eq!(miss.kind(), ResponseKind::Answer);
    assert!(miss.trace.has(Stage::Formulate));
    assert!(miss.trace.has(Stage::CacheInsert));
    let hit = p.handle("b", "Show rushes by Dorian Kellby in week 3");
    assert_eq!(hit.kind(), ResponseKind::Answer, "{:?}", hit.body);
    assert!(hit.trace.cache_hit());
    assert!(!hit.trace.has(Stage::RouteSchema));
    assert!(!hit.trace.has(Stage::Formulate));
    assert!(hit.trace.stages.len() < miss.trace.stages.len());
    let fresh = pipeline().handle("c", "Show rushes by Dorian Kellby in week 3");
    assert_eq!(
        hit.search_request().unwrap().canonical_json(),
        fresh.search_request().unwrap().canonical_json()
    );
    assert_eq!(hit.result(), fresh.result());
}

#[test]
fn trace_is_retrievable_by_id_and_session() {
    let p = pipeline();
    let r = p.handle("t", "How many rushes were there in week 2?");
    assert_eq!(p.trace(&r.trace.trace_id).unwrap(), r.trace);
    assert_eq!(p.trace("t").unwrap(), r.trace);
}

#[test]
fn every_prompt_gets_exactly_one_response_kind() {
    let p = pipeline();
    for prompt in ["", "   ", "???", "pass", "Josh", "Chiefs", "touchdown touchdown", "What about them?"] {
        let r = p.handle("g", prompt);
        let json = serde_json::to_value(&r).unwrap();
        assert!(["answer", "clarify", "reject", "fail"].contains(&json["kind"].as_str().unwrap()));
    }
}
