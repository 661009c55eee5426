#![allow(dead_code)]

use std::sync::Arc;

use playfinder_core::bundled;
use playfinder_core::lm::LmBackend;
use playfinder_core::pipeline::Pipeline;
use playfinder_core::store::{generate_synthetic, PlayStore};

pub const SEED: u64 = 7;
pub const PLAYS: usize = 5000;

pub fn store() -> Arc<PlayStore> {
    let dir = bundled::directory();
    let plays = generate_synthetic(SEED, PLAYS, &dir);
    Arc::new(PlayStore::ingest(plays, Arc::new(bundled::registry())).unwrap())
}

pub fn pipeline_with(backend: Arc<dyn LmBackend>) -> Pipeline {
    Pipeline::new(
        Arc::new(bundled::registry()),
        Arc::new(bundled::directory()),
        Arc::new(bundled::lexicon()),
        backend,
    )
    .with_store(store())
}

pub fn pipeline() -> Pipeline {
    pipeline_with(Arc::new(bundled::grammar_backend()))
}

pub fn player_id(name: &str) -> i64 {
    bundled::directory()
        .players
        .iter()
        .find(|p| p.full_name == name)
        .unwrap()
        .nfl_id
}
