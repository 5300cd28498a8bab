use std::collections::BTreeSet;

use super::system::{critical_count, region_of, Region, SharedMemSystem};
use crate::automata::{compose, Action, Automaton, Execution, FnBehavior, Signature};
use crate::checker::{CheckError, Explorer, ProgressVerdict, SafetyVerdict};
use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MutexProperty {
    MutualExclusion,
    /// If someone is trying and nobody is critical, someone eventually enters.
    DeadlockFreedom,
    /// Every trying process eventually enters.
    NoLockout,
    /// While a process is trying, no other process enters more than `b` times.
    BoundedBypass(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PropertyVerdict {
    Holds { states: usize },
    /// Finite prefix for safety-style properties, fair lasso for progress.
    Violated(Execution),
}

impl PropertyVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, PropertyVerdict::Holds { .. })
    }
}

fn in_region(state: &Value, p: usize, r: Region) -> bool {
    region_of(state, p) == Some(r)
}

pub fn check_mutex(
    system: &SharedMemSystem,
    property: MutexProperty,
    cap: usize,
) -> Result<PropertyVerdict, CheckError> {
    let automaton = system.automaton();
    let explorer = Explorer::new(&automaton).cap(cap);
    let n = system.n();
    let from_progress = |v: ProgressVerdict, states: usize| match v {
        ProgressVerdict::Live => PropertyVerdict::Holds { states },
        ProgressVerdict::FairLassoCounterexample(e) => PropertyVerdict::Violated(e),
    };
    match property {
        MutexProperty::MutualExclusion => Ok(match explorer.safety(|s| critical_count(s) >= 2)? {
            SafetyVerdict::Verified { states } => PropertyVerdict::Holds { states },
            SafetyVerdict::Counterexample(e) => PropertyVerdict::Violated(e),
        }),
        MutexProperty::DeadlockFreedom => {
            let states = explorer.graph()?.len();
            let pending = |s: &Value| {
                (0..n).any(|p| in_region(s, p, Region::Trying)) && critical_count(s) == 0
            };
            let verdict = explorer.progress(pending, |a| a.name.starts_with("crit_"))?;
            Ok(from_progress(verdict, states))
        }
        MutexProperty::NoLockout => {
            let states = explorer.graph()?.len();
            for p in 0..n {
                let goal = format!("crit_{p}");
                let verdict = explorer.progress(|s| in_region(s, p, Region::Trying), |a| a.name == goal)?;
                if let v @ PropertyVerdict::Violated(_) = from_progress(verdict, states) {
                    return Ok(v);
                }
            }
            Ok(PropertyVerdict::Holds { states })
        }
        MutexProperty::BoundedBypass(b) => {
            let monitored = compose(&[automaton.clone(), bypass_monitor(n, b)])
                .expect("monitor only listens to the system's external actions");
            let over = |s: &Value| s.at(1).and_then(|m| m.get("over")).and_then(Value::as_bool) == Some(true);
            Ok(match Explorer::new(&monitored).cap(cap).safety(over)? {
                SafetyVerdict::Verified { states } => PropertyVerdict::Holds { states },
                SafetyVerdict::Counterexample(e) => PropertyVerdict::Violated(project_first(&e)),
            })
        }
    }
}

/// Drops the monitor component from an execution of `system || monitor`.
fn project_first(exec: &Execution) -> Execution {
    let first = |v: &Value| v.at(0).cloned().expect("product state");
    let mut out = Execution::empty(first(&exec.start));
    for step in &exec.steps {
        out.push(step.action.clone(), first(&step.state));
    }
    out
}

/// Observer of `try_i`, `crit_i`, `exit_i`, `rem_i` counting, for each
/// trying process, how often every other process has entered since.
fn bypass_monitor(n: usize, bound: usize) -> Automaton {
    let mut signature = Signature::new();
    let mut alphabet = Vec::new();
    for p in 0..n {
        for op in ["try", "crit", "exit", "rem"] {
            signature = signature.input(format!("{op}_{p}"));
            alphabet.push(Action::bare(format!("{op}_{p}")));
        }
    }
    let start = Value::record([
        ("region", Value::list((0..n).map(|_| Value::Int(0)))),
        ("count", Value::list((0..n * n).map(|_| Value::Int(0)))),
        ("over", Value::Bool(false)),
    ]);
    let limit = bound as i64 + 1;
    let behavior = FnBehavior::new(|_| Vec::new()).with_inputs(alphabet, move |s, a| {
        let (op, p) = a.name.split_once('_')?;
        let p: usize = p.parse().ok()?;
        let mut region: Vec<i64> = s.get("region")?.as_list()?.iter().filter_map(Value::as_int).collect();
        let mut count: Vec<i64> = s.get("count")?.as_list()?.iter().filter_map(Value::as_int).collect();
        let mut over = s.get("over")?.as_bool()?;
        match op {
            "try" if region[p] == 0 => {
                region[p] = 1;
                count[p * n..(p + 1) * n].fill(0);
            }
            "crit" => {
                region[p] = 2;
                for i in (0..n).filter(|&i| i != p && region[i] == 1) {
                    let c = &mut count[i * n + p];
                    *c = (*c + 1).min(limit);
                    over |= *c >= limit;
                }
            }
            "exit" => region[p] = 3,
            "rem" => region[p] = 0,
            _ => {}
        }
        Some(Value::record([
            ("region", Value::list(region.into_iter().map(Value::Int))),
            ("count", Value::list(count.into_iter().map(Value::Int))),
            ("over", Value::Bool(over)),
        ]))
    });
    Automaton::new("bypass-monitor", signature, vec![start], Default::default(), behavior)
        .expect("monitor is well formed")
}

/// Processes that appear in the critical region simultaneously at the end.
pub fn critical_processes(state: &Value, n: usize) -> BTreeSet<usize> {
    (0..n).filter(|&p| in_region(state, p, Region::Critical)).collect()
}
