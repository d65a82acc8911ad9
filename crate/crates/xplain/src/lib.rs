//! Command line, HTTP service and persistence around `xplain-core`.

pub mod cache;
pub mod cli;
pub mod config;
pub mod engine;
pub mod error;
pub mod json;
pub mod persist;
pub mod server;
pub mod service;
