use std::collections::{HashMap, HashSet};

use super::system::{critical_count, Instr, MemState, Region, SharedMemSystem};
use crate::automata::{Action, Execution};
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AttackError {
    #[error("register {0} is not a read/write register")]
    NotReadWrite(String),
    #[error("no register {0}")]
    UnknownRegister(usize),
    #[error("no hiding fragment found after exploring {explored} states (inconclusive)")]
    NotFound { explored: usize },
}

/// A hiding fragment. Writers in `poised` stand before writes covering
/// every target register; `runner` then runs alone, writing only targets;
/// the poised writes then erase every trace of it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttackFragment {
    /// Schedule reaching the poised configuration.
    pub prefix: Execution,
    /// `(process, register)` for each target, in target order.
    pub poised: Vec<(usize, usize)>,
    pub runner: usize,
    pub hidden: Vec<Action>,
    pub observer: usize,
    /// prefix, hidden run, overwrites, then the observer's solo run.
    pub execution: Execution,
    /// The same without the hidden run.
    pub clean: Execution,
    /// Observer's actions after the overwrites, with and without hiding.
    pub attack_view: Vec<Action>,
    pub clean_view: Vec<Action>,
    pub mutual_exclusion_violated: bool,
}

impl AttackFragment {
    pub fn views_equal(&self) -> bool {
        self.attack_view == self.clean_view
    }
}

#[derive(Clone, Copy, Debug)]
pub struct AttackBounds {
    /// Maximum states visited by the search.
    pub states: usize,
    /// Maximum steps of any solo run.
    pub solo: usize,
}

impl Default for AttackBounds {
    fn default() -> Self {
        AttackBounds {
            states: 100_000,
            solo: 64,
        }
    }
}

/// One step of `p` alone: its local step, or `try_p` from the remainder.
fn solo_step(sys: &SharedMemSystem, s: &MemState, p: usize) -> Option<(Action, MemState)> {
    if s.regions[p] == Region::Remainder && s.pcs[p] == 0 {
        return Some((Action::bare(format!("try_{p}")), sys.try_input(s, p)));
    }
    sys.local_step(s, p)
}

fn written_register(sys: &SharedMemSystem, s: &MemState, p: usize) -> Option<usize> {
    match *sys.current(s, p) {
        Instr::Write { reg, .. } => Some(reg),
        _ => None,
    }
}

/// Runs `p` alone until it enters the critical region or the bound runs out.
fn solo_run(sys: &SharedMemSystem, mut s: MemState, p: usize, bound: usize) -> (Vec<(Action, MemState)>, MemState) {
    let mut steps = Vec::new();
    for _ in 0..bound {
        let Some((a, next)) = solo_step(sys, &s, p) else { break };
        steps.push((a, next.clone()));
        s = next;
        if s.regions[p] == Region::Critical {
            break;
        }
    }
    (steps, s)
}

/// Bounded DFS for a configuration where distinct processes are poised to
/// write every target register and another process can run alone, write
/// only target registers, and then be hidden by the overwrites.
pub fn poised_attack(
    sys: &SharedMemSystem,
    targets: &[usize],
    bounds: AttackBounds,
) -> Result<AttackFragment, AttackError> {
    for &r in targets {
        let reg = sys.registers.get(r).ok_or(AttackError::UnknownRegister(r))?;
        if !matches!(reg.access, super::Access::ReadWrite { .. }) {
            return Err(AttackError::NotReadWrite(reg.name.clone()));
        }
    }
    for reg in &sys.registers {
        if !matches!(reg.access, super::Access::ReadWrite { .. }) {
            return Err(AttackError::NotReadWrite(reg.name.clone()));
        }
    }
    if targets.is_empty() {
        return Err(AttackError::NotFound { explored: 0 });
    }

    let automaton = sys.automaton();
    let start = sys.initial_state().encode();
    let mut parent: HashMap<Value, Option<(Value, Action)>> = HashMap::from([(start.clone(), None)]);
    let mut seen: HashSet<Value> = HashSet::new();
    let mut stack = vec![start];
    let mut explored = 0;
    while let Some(v) = stack.pop() {
        if !seen.insert(v.clone()) {
            continue;
        }
        explored += 1;
        if explored > bounds.states {
            break;
        }
        let s = MemState::decode(&v).expect("system state");
        if let Some(frag) = attack_at(sys, targets, &s, bounds.solo, || path(&parent, &v)) {
            return Ok(frag);
        }
        let mut succ = automaton.successors(&v);
        succ.reverse();
        for (a, next) in succ {
            if !seen.contains(&next) {
                parent.entry(next.clone()).or_insert_with(|| Some((v.clone(), a)));
                stack.push(next);
            }
        }
    }
    Err(AttackError::NotFound { explored: explored.min(bounds.states) })
}

fn path(parent: &HashMap<Value, Option<(Value, Action)>>, end: &Value) -> Execution {
    let mut rev = Vec::new();
    let mut cur = end.clone();
    while let Some(Some((p, a))) = parent.get(&cur) {
        rev.push((a.clone(), cur.clone()));
        cur = p.clone();
    }
    let mut exec = Execution::empty(cur);
    for (a, s) in rev.into_iter().rev() {
        exec.push(a, s);
    }
    exec
}

fn poised_assignments(sys: &SharedMemSystem, s: &MemState, targets: &[usize]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![Vec::new()];
    for &r in targets {
        let writers: Vec<usize> = (0..sys.n())
            .filter(|&p| written_register(sys, s, p) == Some(r))
            .collect();
        let mut grown: Vec<Vec<usize>> = Vec::new();
        for chosen in &out {
            for &p in writers.iter().filter(|p| !chosen.contains(p)) {
                let mut c = chosen.clone();
                c.push(p);
                grown.push(c);
            }
        }
        out = grown;
    }
    out
}

fn attack_at(
    sys: &SharedMemSystem,
    targets: &[usize],
    s: &MemState,
    solo: usize,
    prefix: impl Fn() -> Execution,
) -> Option<AttackFragment> {
    for poised in poised_assignments(sys, s, targets) {
        for runner in (0..sys.n()).filter(|q| !poised.contains(q)) {
            let Some(hidden) = hidden_run(sys, targets, s, runner, solo) else {
                continue;
            };
            let overwrite = |mut st: MemState| {
                let mut steps = Vec::new();
                for &p in &poised {
                    let (a, next) = sys.local_step(&st, p).expect("poised writer can write");
                    steps.push((a, next.clone()));
                    st = next;
                }
                (steps, st)
            };
            let after_hidden = hidden.last().map(|(_, st)| st.clone()).expect("nonempty hidden run");
            let (attack_over, attack_state) = overwrite(after_hidden);
            let (clean_over, clean_state) = overwrite(s.clone());
            debug_assert_eq!(attack_state.regs, clean_state.regs);

            let observer = poised[0];
            let (attack_obs, attack_end) = solo_run(sys, attack_state, observer, solo);
            let (clean_obs, _) = solo_run(sys, clean_state, observer, solo);
            let attack_view: Vec<Action> = attack_obs.iter().map(|(a, _)| a.clone()).collect();
            let clean_view: Vec<Action> = clean_obs.iter().map(|(a, _)| a.clone()).collect();
            if attack_view != clean_view {
                continue;
            }

            let prefix = prefix();
            let mut execution = prefix.clone();
            for (a, st) in hidden.iter().chain(&attack_over).chain(&attack_obs) {
                execution.push(a.clone(), st.encode());
            }
            let mut clean = prefix.clone();
            for (a, st) in clean_over.iter().chain(&clean_obs) {
                clean.push(a.clone(), st.encode());
            }
            return Some(AttackFragment {
                prefix,
                poised: poised.iter().copied().zip(targets.iter().copied()).collect(),
                runner,
                hidden: hidden.into_iter().map(|(a, _)| a).collect(),
                observer,
                mutual_exclusion_violated: critical_count(&attack_end.encode()) >= 2,
                execution,
                clean,
                attack_view,
                clean_view,
            });
        }
    }
    None
}

/// Solo run of `runner` from `s` that writes at least one target and no
/// other register. Cut at critical entry if reached, else at the last step
/// before a non-target write or the bound.
fn hidden_run(
    sys: &SharedMemSystem,
    targets: &[usize],
    s: &MemState,
    runner: usize,
    bound: usize,
) -> Option<Vec<(Action, MemState)>> {
    let mut cur = s.clone();
    let mut steps = Vec::new();
    let mut best = None;
    let mut wrote = false;
    for _ in 0..bound {
        if let Some(r) = written_register(sys, &cur, runner) {
            if !targets.contains(&r) {
                break;
            }
            wrote = true;
        }
        let Some((a, next)) = solo_step(sys, &cur, runner) else { break };
        steps.push((a, next.clone()));
        cur = next;
        if wrote {
            best = Some(steps.len());
            if cur.regions[runner] == Region::Critical {
                break;
            }
        }
    }
    best.map(|len| {
        steps.truncate(len);
        steps
    })
}
