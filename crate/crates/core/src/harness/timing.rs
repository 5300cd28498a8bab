use std::collections::{BTreeMap, BTreeSet};

use super::HarnessError;
use crate::automata::{Automaton, Execution};

/// Latest possible time of the last event of `exec` when every task, while
/// continuously enabled, steps within its bound.
///
/// Greedy: each event happens at the earliest deadline among the tasks
/// enabled just before it. A task's deadline is reset to `t + bound` when it
/// steps or becomes enabled. An event preceded by a state with no enabled
/// task is unconstrained, so the result is infinite.
pub fn measure_time(
    automaton: &Automaton,
    exec: &Execution,
    bounds: &BTreeMap<String, f64>,
) -> Result<f64, HarnessError> {
    let states: Vec<_> = exec.states().collect();
    let bound = |task: &str| {
        bounds
            .get(task)
            .copied()
            .ok_or_else(|| HarnessError::MissingBound(task.to_string()))
    };
    let mut deadline: BTreeMap<String, f64> = BTreeMap::new();
    let mut enabled: BTreeSet<String> = automaton.enabled_tasks(states[0]);
    for t in &enabled {
        deadline.insert(t.clone(), bound(t)?);
    }
    let mut now = 0.0_f64;
    for (i, step) in exec.steps.iter().enumerate() {
        if enabled.is_empty() {
            return Ok(f64::INFINITY);
        }
        now = enabled
            .iter()
            .map(|t| deadline[t])
            .fold(f64::INFINITY, f64::min)
            .max(now);
        let stepped = automaton.task_of(&step.action.name).map(str::to_string);
        let after = automaton.enabled_tasks(states[i + 1]);
        deadline.retain(|t, _| after.contains(t));
        for t in &after {
            if !enabled.contains(t) || stepped.as_deref() == Some(t.as_str()) {
                deadline.insert(t.clone(), now + bound(t)?);
            }
        }
        enabled = after;
    }
    Ok(now)
}
