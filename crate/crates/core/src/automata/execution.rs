use std::collections::BTreeSet;
use std::fmt;

use super::action::Action;
use super::automaton::{Automaton, StepError};
use crate::value::Value;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Step {
    pub action: Action,
    pub state: Value,
}

/// Alternating state/action sequence `s0, a1, s1, ...`.
///
/// When `lasso_start` is `Some(i)`, the execution stands for the infinite
/// execution that repeats `steps[i..]` forever: the final state equals the
/// state reached after the first `i` steps.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Execution {
    pub start: Value,
    pub steps: Vec<Step>,
    pub lasso_start: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExecutionError {
    #[error("start state {0} is not a start state of the automaton")]
    BadStart(String),
    #[error("step {index}: {source}")]
    IllegalStep { index: usize, source: StepError },
    #[error("step {index}: recorded state differs from the transition result")]
    WrongState { index: usize },
    #[error("lasso marker at {0} does not close a cycle")]
    OpenLasso(usize),
}

impl Execution {
    pub fn empty(start: Value) -> Self {
        Execution {
            start,
            steps: Vec::new(),
            lasso_start: None,
        }
    }

    /// Re-executes `actions` from `start`, producing the full execution.
    pub fn replay(
        automaton: &Automaton,
        start: Value,
        actions: impl IntoIterator<Item = Action>,
    ) -> Result<Self, ExecutionError> {
        let mut exec = Execution::empty(start);
        for (index, action) in actions.into_iter().enumerate() {
            let next = automaton
                .step(exec.last_state(), &action)
                .map_err(|source| ExecutionError::IllegalStep { index, source })?;
            exec.steps.push(Step { action, state: next });
        }
        Ok(exec)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn last_state(&self) -> &Value {
        self.steps.last().map_or(&self.start, |s| &s.state)
    }

    /// `s0, s1, ..., sn`.
    pub fn states(&self) -> impl Iterator<Item = &Value> {
        std::iter::once(&self.start).chain(self.steps.iter().map(|s| &s.state))
    }

    pub fn actions(&self) -> impl Iterator<Item = &Action> {
        self.steps.iter().map(|s| &s.action)
    }

    pub fn push(&mut self, action: Action, state: Value) {
        self.steps.push(Step { action, state });
    }

    /// Checks that the execution is legal for `automaton`.
    pub fn validate(&self, automaton: &Automaton) -> Result<(), ExecutionError> {
        if !automaton.start_states().contains(&self.start) {
            return Err(ExecutionError::BadStart(self.start.canonical()));
        }
        let mut state = &self.start;
        for (index, step) in self.steps.iter().enumerate() {
            let next = automaton
                .step(state, &step.action)
                .map_err(|source| ExecutionError::IllegalStep { index, source })?;
            if next != step.state {
                return Err(ExecutionError::WrongState { index });
            }
            state = &step.state;
        }
        if let Some(i) = self.lasso_start {
            let anchor = self.states().nth(i);
            if i >= self.steps.len() || anchor != Some(self.last_state()) {
                return Err(ExecutionError::OpenLasso(i));
            }
        }
        Ok(())
    }
}

/// External-action projection of an execution.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Trace(pub Vec<Action>);

impl Trace {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "ε");
        }
        let parts: Vec<String> = self.0.iter().map(Action::to_string).collect();
        write!(f, "{}", parts.join(" "))
    }
}

pub fn trace_of(exec: &Execution, automaton: &Automaton) -> Trace {
    Trace(
        exec.actions()
            .filter(|a| automaton.is_external(a))
            .cloned()
            .collect(),
    )
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Fairness {
    Fair,
    /// Tasks enabled throughout the cycle that never step in it.
    Unfair { starved: BTreeSet<String> },
    /// A plain finite prefix that ends with tasks still enabled.
    Inconclusive { enabled: BTreeSet<String> },
}

/// Fairness verdict for a finite or lasso execution.
///
/// Finite: fair iff no task is enabled in the final state. Lasso: fair iff
/// every task enabled in every state of the cycle takes a step in the cycle.
pub fn fairness(exec: &Execution, automaton: &Automaton) -> Fairness {
    match exec.lasso_start {
        None => {
            let enabled = automaton.enabled_tasks(exec.last_state());
            if enabled.is_empty() {
                Fairness::Fair
            } else {
                Fairness::Inconclusive { enabled }
            }
        }
        Some(i) => {
            let mut throughout: Option<BTreeSet<String>> = None;
            for state in exec.states().skip(i) {
                let here = automaton.enabled_tasks(state);
                throughout = Some(match throughout {
                    None => here,
                    Some(acc) => acc.intersection(&here).cloned().collect(),
                });
            }
            let stepped: BTreeSet<&str> = exec.steps[i..]
                .iter()
                .filter_map(|s| automaton.task_of(&s.action.name))
                .collect();
            let starved: BTreeSet<String> = throughout
                .unwrap_or_default()
                .into_iter()
                .filter(|t| !stepped.contains(t.as_str()))
                .collect();
            if starved.is_empty() {
                Fairness::Fair
            } else {
                Fairness::Unfair { starved }
            }
        }
    }
}

pub fn is_fair(exec: &Execution, automaton: &Automaton) -> bool {
    fairness(exec, automaton) == Fairness::Fair
}

/// `true` iff every trace satisfies the problem predicate.
pub fn solves<'a>(
    traces: impl IntoIterator<Item = &'a Trace>,
    problem: impl Fn(&Trace) -> bool,
) -> bool {
    traces.into_iter().all(problem)
}

/// Both readings of "solves": over all sampled traces, and over the traces of
/// executions judged fair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolveReport {
    pub all_traces: bool,
    pub fair_traces: bool,
    pub fair_count: usize,
    pub total: usize,
}

pub fn solve_report(
    executions: &[Execution],
    automaton: &Automaton,
    problem: impl Fn(&Trace) -> bool,
) -> SolveReport {
    let mut report = SolveReport {
        all_traces: true,
        fair_traces: true,
        fair_count: 0,
        total: executions.len(),
    };
    for exec in executions {
        let ok = problem(&trace_of(exec, automaton));
        let fair = is_fair(exec, automaton);
        report.all_traces &= ok;
        if fair {
            report.fair_count += 1;
            report.fair_traces &= ok;
        }
    }
    report
}
