//! I/O-automaton modeling core: signatures, deterministic transitions,
//! parallel composition, executions, traces and task fairness.

mod action;
mod automaton;
mod execution;

pub use action::{Action, ActionKind, Signature};
pub use automaton::{compose, Automaton, AutomatonError, Behavior, FnBehavior, StepError};
pub use execution::{
    fairness, is_fair, solve_report, solves, trace_of, Execution, ExecutionError, Fairness,
    SolveReport, Step, Trace,
};

pub mod toys;

#[cfg(test)]
mod tests;
