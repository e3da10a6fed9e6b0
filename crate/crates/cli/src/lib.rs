//! Command-line front end for `h3-core`: edge-list ingestion, flat config
//! files, run manifests, and CSV / JSON-lines reports.

pub mod args;
pub mod config;
pub mod error;
pub mod ingest;
pub mod manifest;
pub mod pipeline;
pub mod records;
pub mod report;

pub use error::{CliError, Result};
pub use manifest::{Command, RunManifest};
pub use pipeline::run_pipeline;
