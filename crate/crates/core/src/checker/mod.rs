//! Exhaustive finite-instance analysis: BFS safety checking, fair-cycle
//! progress checking and valence analysis of consensus protocols.

mod flp;
mod graph;
mod progress;
pub mod protocols;
mod safety;
mod valence;

pub use flp::{flp_witness, FlpOutcome, NonDecidingKind};
pub use graph::{isomorphic, CheckError, Edge, Explorer, StateGraph, ENV_ACTOR};
pub use progress::ProgressVerdict;
pub use protocols::{Protocol, ProtocolSystem};
pub use safety::SafetyVerdict;
pub use valence::{valence, MonotonicityError, Valence, ValenceMap};

use crate::automata::{Action, Automaton};
use crate::value::Value;

/// BFS safety check with the default single-shard explorer.
pub fn explore_safety(
    system: &Automaton,
    bad: impl Fn(&Value) -> bool,
    state_cap: usize,
) -> Result<SafetyVerdict, CheckError> {
    Explorer::new(system).cap(state_cap).safety(bad)
}

pub fn check_progress(
    system: &Automaton,
    pending: impl Fn(&Value) -> bool,
    goal: impl Fn(&Action) -> bool,
    state_cap: usize,
) -> Result<ProgressVerdict, CheckError> {
    Explorer::new(system).cap(state_cap).progress(pending, goal)
}
