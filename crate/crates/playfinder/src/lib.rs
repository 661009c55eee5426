//! HTTP service and command-line front end for play search.

pub mod cli;
pub mod config;
pub mod service;

pub use config::{AppError, DataSource, Settings};
pub use service::{router, AppState};
