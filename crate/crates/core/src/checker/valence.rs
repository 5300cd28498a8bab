use std::collections::BTreeSet;

use super::graph::{CheckError, Explorer, StateGraph};
use super::protocols::ProtocolSystem;
use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Valence {
    ZeroValent,
    OneValent,
    Bivalent,
    UndecidedDead,
}

impl Valence {
    fn from_reach(zero: bool, one: bool) -> Valence {
        match (zero, one) {
            (true, true) => Valence::Bivalent,
            (true, false) => Valence::ZeroValent,
            (false, true) => Valence::OneValent,
            (false, false) => Valence::UndecidedDead,
        }
    }

    pub fn is_univalent(self) -> bool {
        matches!(self, Valence::ZeroValent | Valence::OneValent)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum MonotonicityError {
    #[error("config {config} is {parent:?} but its successor {child} is {child_valence:?}")]
    Widened {
        config: usize,
        parent: Valence,
        child: usize,
        child_valence: Valence,
    },
    #[error("bivalent config {0} has neither a bivalent successor nor a 0/1-valent pair")]
    BivalentStuck(usize),
}

/// Decision-reachability classification of every configuration of a
/// binary-input protocol, crash edges included.
#[derive(Clone, Debug)]
pub struct ValenceMap {
    pub graph: StateGraph,
    pub valence: Vec<Valence>,
    /// Whether any process has decided in the configuration.
    pub decided: Vec<bool>,
}

impl ValenceMap {
    pub fn compute(system: &ProtocolSystem, cap: usize) -> Result<Self, CheckError> {
        let automaton = system.automaton();
        let graph = Explorer::new(&automaton).cap(cap).graph()?;
        Ok(Self::from_graph(system, graph))
    }

    pub fn from_graph(system: &ProtocolSystem, graph: StateGraph) -> Self {
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); graph.len()];
        for (s, edges) in graph.edges.iter().enumerate() {
            for e in edges {
                preds[e.target].push(s);
            }
        }
        let reach = |value: i64| -> Vec<bool> {
            let mut seen = vec![false; graph.len()];
            let mut stack: Vec<usize> = (0..graph.len())
                .filter(|&s| system.decided_values(&graph.states[s]).contains(&value))
                .collect();
            for &s in &stack {
                seen[s] = true;
            }
            while let Some(s) = stack.pop() {
                for &p in &preds[s] {
                    if !seen[p] {
                        seen[p] = true;
                        stack.push(p);
                    }
                }
            }
            seen
        };
        let (zero, one) = (reach(0), reach(1));
        let valence = (0..graph.len())
            .map(|s| Valence::from_reach(zero[s], one[s]))
            .collect();
        let decided = graph
            .states
            .iter()
            .map(|c| !system.decided_values(c).is_empty())
            .collect();
        ValenceMap { graph, valence, decided }
    }

    pub fn of(&self, config: &Value) -> Option<Valence> {
        self.graph.index_of(config).map(|s| self.valence[s])
    }

    /// Initial configurations paired with their valence, in state order.
    pub fn initial(&self) -> Vec<(usize, Valence)> {
        self.graph.initial.iter().map(|&s| (s, self.valence[s])).collect()
    }

    pub fn bivalent_initial(&self) -> Option<usize> {
        self.initial()
            .into_iter()
            .find(|&(_, v)| v == Valence::Bivalent)
            .map(|(s, _)| s)
    }

    /// Successors of a univalent configuration stay within its valence (or
    /// lose every decision); a bivalent configuration that has decided
    /// nothing yet has a bivalent successor or a pair of successors with
    /// opposite valences.
    pub fn check_monotonicity(&self) -> Result<(), MonotonicityError> {
        for (s, edges) in self.graph.edges.iter().enumerate() {
            let parent = self.valence[s];
            if parent != Valence::Bivalent {
                for e in edges {
                    let child_valence = self.valence[e.target];
                    if child_valence != parent && child_valence != Valence::UndecidedDead {
                        return Err(MonotonicityError::Widened {
                            config: s,
                            parent,
                            child: e.target,
                            child_valence,
                        });
                    }
                }
                continue;
            }
            let children: BTreeSet<Valence> = edges.iter().map(|e| self.valence[e.target]).collect();
            let split = children.contains(&Valence::ZeroValent) && children.contains(&Valence::OneValent);
            if !self.decided[s] && !split && !children.contains(&Valence::Bivalent) {
                return Err(MonotonicityError::BivalentStuck(s));
            }
        }
        Ok(())
    }
}

/// Valence of one configuration, exploring everything reachable from it.
pub fn valence(config: &Value, system: &ProtocolSystem, cap: usize) -> Result<Valence, CheckError> {
    let automaton = system.automaton().restarted_at(vec![config.clone()]);
    let graph = Explorer::new(&automaton).cap(cap).graph()?;
    let map = ValenceMap::from_graph(system, graph);
    Ok(map.of(config).expect("root is explored"))
}
