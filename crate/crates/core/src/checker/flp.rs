use super::graph::{CheckError, Explorer, ENV_ACTOR};
use super::progress::find_fair_lasso;
use super::protocols::ProtocolSystem;
use super::safety::SafetyVerdict;
use super::valence::{Valence, ValenceMap};
use crate::automata::Execution;
use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NonDecidingKind {
    /// Crash-free fair cycle through bivalent, undecided configurations.
    BivalentCycle,
    /// A live process stays undecided forever after a crash (or with none).
    Blocked,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FlpOutcome {
    NonDecidingRun {
        bivalent_initial: Option<Value>,
        /// Fair execution: a lasso, or a finite run with no enabled task.
        run: Execution,
        kind: NonDecidingKind,
        crashed: Vec<usize>,
    },
    AllRunsDecide {
        agreement_violation: Option<Execution>,
        validity_violation: Option<Execution>,
    },
}

impl FlpOutcome {
    pub fn is_non_deciding(&self) -> bool {
        matches!(self, FlpOutcome::NonDecidingRun { .. })
    }
}

/// Looks for a fair run in which some live process never decides. A
/// bivalent non-deciding cycle is preferred; failing that, a fair run
/// blocked by a crash. When every fair run decides, searches for agreement
/// and validity violations instead.
pub fn flp_witness(system: &ProtocolSystem, cap: usize) -> Result<FlpOutcome, CheckError> {
    let map = ValenceMap::compute(system, cap)?;
    let graph = &map.graph;
    let bivalent_initial = map.bivalent_initial().map(|s| graph.states[s].clone());
    let local_edge = |e: &super::graph::Edge| e.actor != ENV_ACTOR;

    let cycle = find_fair_lasso(
        graph,
        |s| {
            map.valence[s] == Valence::Bivalent
                && !map.decided[s]
                && ProtocolSystem::crash_count(&graph.states[s]) == 0
        },
        local_edge,
    );
    if let Some(run) = cycle {
        return Ok(FlpOutcome::NonDecidingRun {
            bivalent_initial,
            run,
            kind: NonDecidingKind::BivalentCycle,
            crashed: Vec::new(),
        });
    }

    let n = system.n();
    let stuck = |s: usize, p: usize| {
        let c = &graph.states[s];
        !ProtocolSystem::crashed(c, p) && system.decisions(c)[p].is_none()
    };
    let terminal = (0..graph.len()).find(|&s| {
        graph.edges[s].iter().all(|e| e.actor == ENV_ACTOR) && (0..n).any(|p| stuck(s, p))
    });
    let run = terminal
        .map(|s| graph.path_to(s))
        .or_else(|| (0..n).find_map(|p| find_fair_lasso(graph, |s| stuck(s, p), local_edge)));
    if let Some(run) = run {
        let last = run.last_state();
        let crashed = (0..n).filter(|&p| ProtocolSystem::crashed(last, p)).collect();
        return Ok(FlpOutcome::NonDecidingRun {
            bivalent_initial,
            run,
            kind: NonDecidingKind::Blocked,
            crashed,
        });
    }

    let automaton = system.automaton();
    let explorer = Explorer::new(&automaton).cap(cap);
    let counterexample = |v: SafetyVerdict| match v {
        SafetyVerdict::Counterexample(e) => Some(e),
        SafetyVerdict::Verified { .. } => None,
    };
    Ok(FlpOutcome::AllRunsDecide {
        agreement_violation: counterexample(explorer.safety(|c| system.agreement_violated(c))?),
        validity_violation: counterexample(explorer.safety(|c| system.validity_violated(c))?),
    })
}
