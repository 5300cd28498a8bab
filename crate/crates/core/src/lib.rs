//! A laboratory for classical distributed-computing results: an I/O-automaton
//! modeling core, a deterministic simulation harness with failure
//! adversaries, reference fault-tolerant algorithms, and an explicit-state
//! checker for small instances.

pub mod automata;
pub mod checker;
pub mod clocksync;
pub mod consensus;
pub mod consistency;
pub mod harness;
pub mod mutex;
pub mod value;

pub use value::Value;
