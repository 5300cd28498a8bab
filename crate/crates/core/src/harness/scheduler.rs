use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::automata::{fairness, Action, Automaton, Execution, Fairness};
use crate::value::Value;

/// A scheduling choice: any enabled action of a task (the least one in
/// action order), or one exact action.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Choice {
    Task(String),
    Action { name: String, payload: Value },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum AsyncPolicy {
    /// Seeded: a uniformly random enabled task, then a uniformly random
    /// action of that task.
    UniformFair,
    /// Follows `prefix`, then repeats `cycle` forever.
    AdversaryScripted { prefix: Vec<Choice>, cycle: Vec<Choice> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AsyncSchedule {
    pub seed: u64,
    pub max_steps: usize,
    pub policy: AsyncPolicy,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AsyncRun {
    pub execution: Execution,
    /// No locally-controlled action was enabled at the end.
    pub quiescent: bool,
    pub fairness: Fairness,
}

impl AsyncRun {
    pub fn is_fair(&self) -> bool {
        self.fairness == Fairness::Fair
    }
}

fn pick(automaton: &Automaton, state: &Value, choice: &Choice) -> Option<(Action, Value)> {
    let enabled = automaton.enabled(state);
    match choice {
        Choice::Task(task) => enabled
            .into_iter()
            .find(|(a, _)| automaton.task_of(&a.name) == Some(task.as_str())),
        Choice::Action { name, payload } => enabled
            .into_iter()
            .find(|(a, _)| &a.name == name && &a.payload == payload),
    }
}

/// Runs `automaton` from `start` under `schedule`.
///
/// A scripted cycle that returns to the state it started from closes a
/// lasso and ends the run.
pub fn run_async(
    automaton: &Automaton,
    start: &Value,
    schedule: &AsyncSchedule,
) -> Result<AsyncRun, HarnessError> {
    if schedule.max_steps == 0 {
        return Err(HarnessError::BadSchedule("maxSteps must be at least 1".into()));
    }
    let mut exec = Execution::empty(start.clone());
    let mut quiescent = false;
    match &schedule.policy {
        AsyncPolicy::UniformFair => {
            let mut rng = ChaCha8Rng::seed_from_u64(schedule.seed);
            while exec.len() < schedule.max_steps {
                let enabled = automaton.enabled(exec.last_state());
                if enabled.is_empty() {
                    quiescent = true;
                    break;
                }
                let mut tasks: Vec<&str> = enabled
                    .iter()
                    .filter_map(|(a, _)| automaton.task_of(&a.name))
                    .collect();
                tasks.dedup();
                let task = tasks[rng.random_range(0..tasks.len())];
                let options: Vec<&(Action, Value)> = enabled
                    .iter()
                    .filter(|(a, _)| automaton.task_of(&a.name) == Some(task))
                    .collect();
                let (a, s) = options[rng.random_range(0..options.len())].clone();
                exec.push(a, s);
            }
        }
        AsyncPolicy::AdversaryScripted { prefix, cycle } => {
            for (i, choice) in prefix.iter().enumerate() {
                if exec.len() >= schedule.max_steps {
                    break;
                }
                if automaton.enabled(exec.last_state()).is_empty() {
                    quiescent = true;
                    break;
                }
                let (a, s) = pick(automaton, exec.last_state(), choice)
                    .ok_or(HarnessError::ChoiceDisabled { step: i })?;
                exec.push(a, s);
            }
            let mut cycle_starts: HashMap<Value, usize> = HashMap::new();
            'outer: while !quiescent && !cycle.is_empty() && exec.len() < schedule.max_steps {
                if let Some(&at) = cycle_starts.get(exec.last_state()) {
                    exec.lasso_start = Some(at);
                    break;
                }
                cycle_starts.insert(exec.last_state().clone(), exec.len());
                for choice in cycle {
                    if exec.len() >= schedule.max_steps {
                        break 'outer;
                    }
                    if automaton.enabled(exec.last_state()).is_empty() {
                        quiescent = true;
                        break 'outer;
                    }
                    let step = exec.len();
                    let (a, s) = pick(automaton, exec.last_state(), choice)
                        .ok_or(HarnessError::ChoiceDisabled { step })?;
                    exec.push(a, s);
                }
            }
            if !quiescent && exec.lasso_start.is_none() {
                quiescent = automaton.enabled(exec.last_state()).is_empty();
            }
        }
    }
    let fairness = fairness(&exec, automaton);
    Ok(AsyncRun {
        execution: exec,
        quiescent,
        fairness,
    })
}
