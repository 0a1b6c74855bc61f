//! Orchestration for the `impactrank` command: configuration resolution and
//! the ingest, compute, export, correlate and serve stages.

pub mod config;
pub mod stages;

pub use config::{ConfigError, PipelineConfig};
pub use stages::{run_subcommand, StageError, Subcommand};
