use super::graph::{CheckError, Explorer};
use crate::automata::Execution;
use crate::value::Value;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SafetyVerdict {
    /// No bad state reachable; exact reachable-state count.
    Verified { states: usize },
    /// Shortest execution reaching a bad state.
    Counterexample(Execution),
}

impl SafetyVerdict {
    pub fn is_verified(&self) -> bool {
        matches!(self, SafetyVerdict::Verified { .. })
    }
}

impl Explorer<'_> {
    /// BFS reachability check of `bad`. Counterexamples are shortest, with
    /// ties broken by `(actor, action)` order.
    pub fn safety(&self, bad: impl Fn(&Value) -> bool) -> Result<SafetyVerdict, CheckError> {
        let (graph, hit) = self.bfs(bad)?;
        Ok(match hit {
            Some(target) => SafetyVerdict::Counterexample(graph.path_to(target)),
            None => SafetyVerdict::Verified { states: graph.len() },
        })
    }
}
