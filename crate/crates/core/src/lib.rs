//! Natural-language search over a play-by-play dataset.
//!
//! A prompt is classified, decomposed into entities, actions and conditions,
//! resolved against a player/team directory, routed to statistical schemas,
//! compiled into a [`request::QueryPlan`], executed against an in-memory
//! [`store::PlayStore`], and summarized. Redacted query templates are cached
//! so that a structurally identical question skips routing and formulation.

pub mod bundled;
pub mod cache;
pub mod directory;
pub mod eval;
pub mod lm;
pub mod media;
pub mod pipeline;
pub mod request;
pub mod schema;
pub mod session;
pub mod store;
