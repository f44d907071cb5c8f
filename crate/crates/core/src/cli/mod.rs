//! Command-line front end: ingestion, pipeline orchestration and artifacts.

pub mod app;
pub mod dataset;
pub mod report;

pub use app::{main_with_args, run, Cli};
