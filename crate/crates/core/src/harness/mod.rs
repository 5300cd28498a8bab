//! Execution drivers: lock-step rounds with crash and Byzantine adversaries,
//! seeded or scripted asynchronous scheduling, a partially synchronous
//! network with a stabilization time, and the asynchronous time measure.

mod log;
mod network;
mod rounds;
mod scheduler;
mod script;
mod timing;
mod tracefile;

pub use log::{execution_log, read_log, write_log, LogRecord, LOG_HEADER};
pub use network::{
    run_network, CrashAt, DelayPolicy, DelayRule, Delivery, GstModel, NetConfig, NetProcess, NetRun, Outbox,
    Partition,
};
pub use rounds::{run_rounds, FailureKind, MessageGrid, RoundModel, RoundProcess, RoundRun};
pub use scheduler::{run_async, AsyncPolicy, AsyncRun, AsyncSchedule, Choice};
pub use script::{AdversaryScript, CrashEvent, Forgery, SCRIPT_VERSION};
pub use timing::measure_time;
pub use tracefile::{records_digest, TraceError, TraceFile, LASSO_MARKER, TRACE_MAGIC, TRACE_VERSION};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HarnessError {
    #[error("adversary names {named} faulty processes but the budget is {f}")]
    BudgetExceeded { named: usize, f: usize },
    #[error("script uses Byzantine forgeries under the crash model")]
    WrongFailureKind,
    #[error("no process {0}")]
    UnknownProcess(usize),
    #[error("invalid adversary script: {0}")]
    BadScript(String),
    #[error("invalid schedule: {0}")]
    BadSchedule(String),
    #[error("scripted choice at step {step} is not enabled")]
    ChoiceDisabled { step: usize },
    #[error("task {0} has no time bound")]
    MissingBound(String),
}
