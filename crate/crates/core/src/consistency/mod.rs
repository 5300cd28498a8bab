//! Replicated read/write registers, linearizability checking, and the
//! partition scenarios that force a choice between consistency and
//! availability.

mod cap;
mod history;
mod lincheck;
mod register;
#[cfg(test)]
mod tests;

pub use cap::{cap_config, cap_scenario, canonical_script, CapError, CapReport, CapVariant, PartitionScenario};
pub use history::{Event, History, HistoryBuilder, HistoryError, OpKind, Operation, Phase};
pub use lincheck::{lin_check, lin_check_enumerate, LinError, LinResult, INITIAL, MAX_OPS};
pub use register::{run_register, ClientOp, Op, Protocol, RegisterConfig, RegisterMsg, RegisterRun, Tag};
