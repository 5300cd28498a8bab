use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{ConsensusError, ConsensusInstance};
use crate::harness::{
    run_network, CrashAt, DelayPolicy, DelayRule, GstModel, LogRecord, NetConfig, NetProcess, Outbox,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Lock {
    pub value: i64,
    pub attempt: u64,
    /// Step at which the lock was taken.
    pub set_at: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum DlsMsg {
    Report { attempt: u64, value: i64, lock: Option<Lock> },
    /// `basis` is the attempt of the lock the value was taken from.
    Propose { attempt: u64, value: i64, basis: Option<u64> },
    Ack { attempt: u64 },
    Decide { value: i64, attempt: u64 },
}

/// One DLS participant. Attempt `a` covers steps `[4Δa, 4Δ(a+1))` and is
/// coordinated by `a mod n`; each phase lasts Δ steps.
#[derive(Clone, Debug)]
pub struct DlsProcess {
    pub id: usize,
    n: usize,
    delta: u64,
    pub input: i64,
    pub lock: Option<Lock>,
    pub decided: Option<(i64, u64)>,
    pub decided_at: Option<u64>,
    /// Every lock this process has held, in order.
    pub locks: Vec<Lock>,
    attempt: u64,
    reports: BTreeMap<usize, (i64, Option<Lock>)>,
    acks: BTreeSet<usize>,
    proposal: Option<i64>,
}

impl DlsProcess {
    pub fn new(id: usize, n: usize, delta: u64, input: i64) -> Self {
        DlsProcess {
            id,
            n,
            delta,
            input,
            lock: None,
            decided: None,
            decided_at: None,
            locks: Vec::new(),
            attempt: 0,
            reports: BTreeMap::new(),
            acks: BTreeSet::new(),
            proposal: None,
        }
    }

    pub fn coordinator(&self, attempt: u64) -> usize {
        (attempt % self.n as u64) as usize
    }

    fn majority(&self) -> usize {
        self.n / 2 + 1
    }

    fn enter(&mut self, now: u64) {
        let a = now / (4 * self.delta);
        if a != self.attempt {
            self.attempt = a;
            self.reports.clear();
            self.acks.clear();
            self.proposal = None;
        }
    }

    fn decide(&mut self, value: i64, attempt: u64, now: u64) {
        if self.decided.is_none() {
            self.decided = Some((value, attempt));
            self.decided_at = Some(now);
        }
    }

    /// Sends `msg`, delivering it at once when addressed to self.
    fn emit(&mut self, now: u64, to: usize, msg: DlsMsg, out: &mut Outbox<DlsMsg>) {
        if to == self.id {
            self.handle(now, self.id, msg, out);
        } else {
            out.send(to, msg);
        }
    }

    fn broadcast(&mut self, now: u64, msg: DlsMsg, out: &mut Outbox<DlsMsg>) {
        for q in 0..self.n {
            self.emit(now, q, msg.clone(), out);
        }
    }

    fn acceptable(lock: Option<Lock>, value: i64, basis: Option<u64>) -> bool {
        match lock {
            None => true,
            Some(l) => l.value == value || basis.is_some_and(|b| l.attempt < b),
        }
    }

    fn handle(&mut self, now: u64, from: usize, msg: DlsMsg, out: &mut Outbox<DlsMsg>) {
        self.enter(now);
        let a = self.attempt;
        match msg {
            DlsMsg::Report { attempt, value, lock } if attempt == a && self.coordinator(a) == self.id => {
                self.reports.insert(from, (value, lock));
            }
            DlsMsg::Propose { attempt, value, basis } if attempt == a => {
                if !Self::acceptable(self.lock, value, basis) {
                    return;
                }
                let lock = Lock { value, attempt, set_at: now };
                self.lock = Some(lock);
                self.locks.push(lock);
                let c = self.coordinator(a);
                self.emit(now, c, DlsMsg::Ack { attempt }, out);
            }
            DlsMsg::Ack { attempt } if attempt == a && self.coordinator(a) == self.id => {
                self.acks.insert(from);
            }
            DlsMsg::Decide { value, attempt } => self.decide(value, attempt, now),
            _ => {}
        }
    }

    /// Highest-attempt reported lock if any, else the smallest reported value.
    fn choose(&self) -> Option<(i64, Option<u64>)> {
        if self.reports.len() < self.majority() {
            return None;
        }
        let best = self.reports.values().filter_map(|(_, l)| *l).max_by_key(|l| l.attempt);
        let (value, basis) = match best {
            Some(l) => (l.value, Some(l.attempt)),
            None => (self.reports.values().map(|(v, _)| *v).min()?, None),
        };
        let accepting = self
            .reports
            .values()
            .filter(|(_, l)| Self::acceptable(*l, value, basis))
            .count();
        (accepting >= self.majority()).then_some((value, basis))
    }
}

impl NetProcess for DlsProcess {
    type Msg = DlsMsg;

    fn on_message(&mut self, now: u64, from: usize, msg: DlsMsg, out: &mut Outbox<DlsMsg>) {
        self.handle(now, from, msg, out);
    }

    fn on_tick(&mut self, now: u64, out: &mut Outbox<DlsMsg>) {
        if !now.is_multiple_of(self.delta) {
            return;
        }
        self.enter(now);
        let a = self.attempt;
        let c = self.coordinator(a);
        match (now / self.delta) % 4 {
            0 => {
                if let Some((value, attempt)) = self.decided {
                    for q in (0..self.n).filter(|&q| q != self.id) {
                        out.send(q, DlsMsg::Decide { value, attempt });
                    }
                }
                let value = self.lock.map_or(self.input, |l| l.value);
                let lock = self.lock;
                self.emit(now, c, DlsMsg::Report { attempt: a, value, lock }, out);
            }
            1 if c == self.id => {
                if let Some((value, basis)) = self.choose() {
                    self.proposal = Some(value);
                    self.broadcast(now, DlsMsg::Propose { attempt: a, value, basis }, out);
                }
            }
            3 if c == self.id => {
                if let Some(value) = self.proposal {
                    if self.acks.len() >= self.majority() {
                        self.decide(value, a, now);
                        self.broadcast(now, DlsMsg::Decide { value, attempt: a }, out);
                    }
                }
            }
            _ => {}
        }
    }
}

#[derive(Clone, Debug)]
pub struct DlsRun {
    /// Decisions of every process, including ones that later crashed.
    pub decisions: Vec<Option<i64>>,
    /// Attempt in which each process decided.
    pub decided_attempt: Vec<Option<u64>>,
    pub decided_at: Vec<Option<u64>>,
    pub crashed: Vec<Option<u64>>,
    /// `(process, lock)` for every lock taken.
    pub locks: Vec<(usize, Lock)>,
    pub steps: u64,
    pub log: Vec<LogRecord>,
}

impl DlsRun {
    pub fn agreement(&self) -> bool {
        self.decisions.iter().flatten().collect::<BTreeSet<_>>().len() <= 1
    }

    pub fn valid(&self, inputs: &[i64]) -> bool {
        self.decisions.iter().flatten().all(|d| inputs.contains(d))
    }

    pub fn all_live_decided(&self) -> bool {
        (0..self.decisions.len()).all(|p| self.crashed[p].is_some() || self.decisions[p].is_some())
    }

    /// Largest attempt in which any process decided.
    pub fn last_decided_attempt(&self) -> Option<u64> {
        self.decided_attempt.iter().flatten().max().copied()
    }

    /// Locks on different values are ordered the same way by attempt and
    /// by the step they were taken.
    pub fn locks_coherent(&self) -> bool {
        self.locks.iter().all(|(_, x)| {
            self.locks
                .iter()
                .all(|(_, y)| x.value == y.value || x.attempt >= y.attempt || x.set_at < y.set_at)
        })
    }
}

/// Runs DLS on `instance` under `config`, stopping once every live
/// process has decided.
pub fn dls_consensus(instance: &ConsensusInstance, config: &NetConfig) -> Result<DlsRun, ConsensusError> {
    let n = instance.n;
    if 2 * instance.f >= n {
        return Err(ConsensusError::QuorumUnreachable { n, f: instance.f });
    }
    let delta = config.model.delta.max(1);
    let procs = instance
        .inputs
        .iter()
        .enumerate()
        .map(|(p, &v)| DlsProcess::new(p, n, delta, v))
        .collect();
    let run = run_network(procs, config, |ps: &[DlsProcess], crashed| {
        ps.iter().zip(crashed).all(|(p, c)| c.is_some() || p.decided.is_some())
    })?;
    Ok(DlsRun {
        decisions: run.processes.iter().map(|p| p.decided.map(|d| d.0)).collect(),
        decided_attempt: run.processes.iter().map(|p| p.decided.map(|d| d.1)).collect(),
        decided_at: run.processes.iter().map(|p| p.decided_at).collect(),
        locks: run
            .processes
            .iter()
            .flat_map(|p| p.locks.iter().map(move |l| (p.id, *l)))
            .collect(),
        crashed: run.crashed,
        steps: run.steps,
        log: run.log,
    })
}

/// Horizon long enough for every live process to decide after `gst`:
/// one partial attempt, then up to `f + 1` coordinators, plus slack.
pub fn dls_horizon(n: usize, f: usize, gst: u64, delta: u64) -> u64 {
    gst + 4 * delta * (f as u64 + 3).max(n as u64 + 2)
}

/// A chaotic pre-GST run: seeded delays up to `4 * gst` (clamped to the
/// stabilization deadline) and up to `f` crashes at seeded steps.
pub fn chaos_config(n: usize, f: usize, seed: u64, gst: u64, delta: u64) -> NetConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x444c_5300);
    let horizon = dls_horizon(n, f, gst, delta);
    let crash_count = rng.random_range(0..=f);
    let mut victims: Vec<usize> = (0..n).collect();
    let mut crashes = Vec::new();
    for _ in 0..crash_count {
        let p = victims.swap_remove(rng.random_range(0..victims.len()));
        crashes.push(CrashAt { process: p, step: rng.random_range(0..horizon) });
    }
    NetConfig::new(
        GstModel { gst, delta, f },
        DelayPolicy::Seeded { seed, max_delay: (4 * gst).max(1) },
        horizon,
    )
    .with_crashes(crashes)
}

/// A scripted run that splits every pre-GST attempt: per attempt window
/// and link, messages either arrive within Δ or are held to the deadline,
/// so successive coordinators see different quorums and may propose
/// conflicting values.
pub fn conflict_config(n: usize, f: usize, scenario: u64, gst: u64, delta: u64) -> NetConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(scenario ^ 0x434f_4e46);
    let attempt_len = 4 * delta;
    let mut rules = Vec::new();
    for a in 0..gst.div_ceil(attempt_len) {
        let from_step = a * attempt_len;
        for from in 0..n {
            for to in (0..n).filter(|&t| t != from) {
                let held = rng.random_bool(0.5);
                rules.push(DelayRule {
                    from: Some(from),
                    to: Some(to),
                    from_step,
                    to_step: (from_step + attempt_len).min(gst),
                    delay: if held { gst + delta } else { 1 + rng.random_range(0..delta) },
                });
            }
        }
    }
    let crashes = if f > 0 && rng.random_bool(0.5) {
        vec![CrashAt { process: rng.random_range(0..n), step: rng.random_range(0..gst.max(1)) }]
    } else {
        Vec::new()
    };
    NetConfig::new(GstModel { gst, delta, f }, DelayPolicy::Scripted(rules), dls_horizon(n, f, gst, delta))
        .with_crashes(crashes)
}
