//! Configuration-driven driver for scans, verification suites and corpus export.

#![allow(clippy::needless_range_loop)]

pub mod config;
pub mod report;
pub mod run;
pub mod suites;
mod wave;

pub use config::{load, parse, ConfigError, RunConfig};
pub use report::Report;
pub use run::{run_corpus, run_scan, run_verify, verify_report, CliError, Options};
