//! Scenario runner: loads JSON experiment files, runs every (scenario,
//! seed) pair on a worker pool, and writes `results.csv` plus trace files.

pub mod error;
pub mod kinds;
pub mod output;
pub mod runner;
pub mod scenario;

pub use error::CliError;
pub use runner::{replay, replay_file, run_file, run_scenarios, ReplayReport, RunOptions, RunReport};
