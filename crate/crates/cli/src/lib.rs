//! Experiment harness and file formats for the `optbench` option-pricing
//! benchmark. The `optbench` binary in this crate drives data generation,
//! GARCH fitting, the four experiment protocols, and score-rate reports;
//! the numerical core lives in `optbench-core`.

pub mod config;
pub mod csvio;
pub mod errors;
pub mod harness;
pub mod report;
