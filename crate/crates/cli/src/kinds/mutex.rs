use distlab::automata::{is_fair, Automaton, Execution};
use distlab::harness::TraceFile;
use distlab::mutex::{
    burns_lynch, check_mutex, critical_count, one_register, poised_attack, region_of, semaphore, AttackBounds,
    AttackError, MutexProperty, PropertyVerdict, Region, SharedMemSystem,
};
use distlab::Value;
use serde::Deserialize;

use super::{trace_seed, Job, Outcome};

fn two() -> usize {
    2
}

fn default_cap() -> usize {
    1_000_000
}

fn default_properties() -> Vec<String> {
    vec!["mutualExclusion".into(), "deadlockFreedom".into()]
}

/// `mutualExclusion`, `deadlockFreedom`, `noLockout` or `boundedBypass:<b>`.
pub fn parse_property(s: &str) -> Result<MutexProperty, String> {
    Ok(match s {
        "mutualExclusion" => MutexProperty::MutualExclusion,
        "deadlockFreedom" => MutexProperty::DeadlockFreedom,
        "noLockout" => MutexProperty::NoLockout,
        _ => match s.strip_prefix("boundedBypass:") {
            Some(b) => MutexProperty::BoundedBypass(b.parse().map_err(|e| format!("{s}: {e}"))?),
            None => return Err(format!("unknown property {s:?}")),
        },
    })
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct MutexParams {
    #[serde(default = "two")]
    n: usize,
    #[serde(default = "default_cap")]
    cap: usize,
    #[serde(default = "default_properties")]
    properties: Vec<String>,
}

pub struct MutexJob {
    kind: &'static str,
    system: SharedMemSystem,
    cap: usize,
    properties: Vec<(String, MutexProperty)>,
}

impl MutexJob {
    pub fn new(kind: &str, p: MutexParams) -> Result<Self, String> {
        if p.n == 0 {
            return Err("need at least one process".into());
        }
        let (kind, system) = match kind {
            "mutex.burns" => ("mutex.burns", burns_lynch(p.n)),
            _ => ("mutex.semaphore", semaphore(p.n)),
        };
        let properties = p
            .properties
            .iter()
            .map(|s| parse_property(s).map(|m| (s.clone(), m)))
            .collect::<Result<_, _>>()?;
        Ok(MutexJob { kind, system, cap: p.cap, properties })
    }
}

impl Job for MutexJob {
    fn run(&self, seed: Option<u64>) -> Result<Outcome, String> {
        let automaton = self.system.automaton();
        let mut out = Outcome { pass: true, ..Outcome::default() };
        for (name, property) in &self.properties {
            match check_mutex(&self.system, *property, self.cap).map_err(|e| e.to_string())? {
                PropertyVerdict::Holds { states } => {
                    out.metric(&format!("{name}.states"), states);
                }
                PropertyVerdict::Violated(exec) => {
                    out.pass = false;
                    out.metric(&format!("{name}.counterexampleSteps"), exec.len());
                    out.traces.push(
                        TraceFile::from_execution(&automaton, &exec, self.kind, trace_seed(seed), "fail")
                            .with_label(name.clone()),
                    );
                }
            }
        }
        Ok(out)
    }

    fn automaton(&self) -> Option<Automaton> {
        Some(self.system.automaton())
    }

    fn violates(&self, label: &str, exec: &Execution) -> bool {
        let n = self.system.n();
        match parse_property(label) {
            Ok(MutexProperty::MutualExclusion) => critical_count(exec.last_state()) >= 2,
            Ok(MutexProperty::DeadlockFreedom) => stuck_cycle(exec, &self.system.automaton(), |s, name| {
                let trying = (0..n).any(|p| region_of(s, p) == Some(Region::Trying));
                trying && critical_count(s) == 0 && !name.is_some_and(|a| a.starts_with("crit_"))
            }),
            Ok(MutexProperty::NoLockout) => (0..n).any(|p| {
                let goal = format!("crit_{p}");
                stuck_cycle(exec, &self.system.automaton(), |s, name| {
                    region_of(s, p) == Some(Region::Trying) && name != Some(goal.as_str())
                })
            }),
            Ok(MutexProperty::BoundedBypass(b)) => bypass_exceeded(exec, n, b),
            Err(_) => false,
        }
    }
}

/// A fair lasso whose cycle never leaves `stuck`. The predicate sees each
/// cycle state and the action that entered it.
fn stuck_cycle(exec: &Execution, automaton: &Automaton, stuck: impl Fn(&Value, Option<&str>) -> bool) -> bool {
    let Some(l) = exec.lasso_start else { return false };
    let entry = exec.states().nth(l).expect("lasso start is within the execution");
    stuck(entry, None)
        && exec.steps[l..].iter().all(|s| stuck(&s.state, Some(s.action.name.as_str())))
        && is_fair(exec, automaton)
}

/// Some process, while trying, saw another enter more than `b` times.
fn bypass_exceeded(exec: &Execution, n: usize, b: usize) -> bool {
    let mut trying = vec![false; n];
    let mut count = vec![0usize; n * n];
    for a in exec.actions() {
        let Some((op, p)) = a.name.split_once('_') else { continue };
        let Ok(p) = p.parse::<usize>() else { continue };
        match op {
            "try" => {
                trying[p] = true;
                count[p * n..(p + 1) * n].fill(0);
            }
            "crit" => {
                trying[p] = false;
                for i in (0..n).filter(|&i| i != p && trying[i]) {
                    count[i * n + p] += 1;
                    if count[i * n + p] > b {
                        return true;
                    }
                }
            }
            _ => {}
        }
    }
    false
}

#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum AttackSystem {
    /// One shared read/write register for any number of processes.
    #[default]
    OneRegister,
    Burns,
}

fn attack_states() -> usize {
    AttackBounds::default().states
}

fn attack_solo() -> usize {
    AttackBounds::default().solo
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct AttackParams {
    #[serde(default)]
    system: AttackSystem,
    #[serde(default = "two")]
    n: usize,
    #[serde(default = "first_register")]
    targets: Vec<usize>,
    #[serde(default = "attack_states")]
    states: usize,
    #[serde(default = "attack_solo")]
    solo: usize,
}

fn first_register() -> Vec<usize> {
    vec![0]
}

pub struct AttackJob {
    system: SharedMemSystem,
    targets: Vec<usize>,
    bounds: AttackBounds,
}

impl AttackJob {
    pub fn new(p: AttackParams) -> Result<Self, String> {
        if p.n < 2 {
            return Err("the attack needs at least two processes".into());
        }
        let system = match p.system {
            AttackSystem::OneRegister => one_register(p.n),
            AttackSystem::Burns => burns_lynch(p.n),
        };
        if let Some(r) = p.targets.iter().find(|&&r| r >= system.registers.len()) {
            return Err(AttackError::UnknownRegister(*r).to_string());
        }
        Ok(AttackJob { system, targets: p.targets, bounds: AttackBounds { states: p.states, solo: p.solo } })
    }
}

impl Job for AttackJob {
    fn run(&self, seed: Option<u64>) -> Result<Outcome, String> {
        let mut out = Outcome { pass: true, ..Outcome::default() };
        match poised_attack(&self.system, &self.targets, self.bounds) {
            Ok(frag) => {
                if !frag.views_equal() {
                    return Err("hiding fragment leaves the observer's views different".into());
                }
                out.metric("found", true);
                out.metric("viewsEqual", true);
                out.metric("runner", frag.runner);
                out.metric("observer", frag.observer);
                out.metric("hiddenSteps", frag.hidden.len());
                out.metric("mutualExclusionViolated", frag.mutual_exclusion_violated);
                if frag.mutual_exclusion_violated {
                    out.pass = false;
                    let automaton = self.system.automaton();
                    out.traces.push(
                        TraceFile::from_execution(&automaton, &frag.execution, "mutex.attack", trace_seed(seed), "fail")
                            .with_label("mutualExclusion"),
                    );
                }
            }
            Err(AttackError::NotFound { explored }) => {
                out.metric("found", false);
                out.metric("inconclusive", true);
                out.metric("explored", explored);
            }
            Err(e) => return Err(e.to_string()),
        }
        Ok(out)
    }

    fn automaton(&self) -> Option<Automaton> {
        Some(self.system.automaton())
    }

    fn violates(&self, label: &str, exec: &Execution) -> bool {
        label == "mutualExclusion" && critical_count(exec.last_state()) >= 2
    }
}
