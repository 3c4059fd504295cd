//! Library surface of the experiment runner, exposed for integration tests
//! and for embedding the orchestration in other tools.

pub mod config;
pub mod error;
pub mod runner;
pub mod svg;
