use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{ft_average, ConsensusError};
use crate::harness::{
    run_network, run_rounds, AdversaryScript, CrashAt, DelayPolicy, GstModel, NetConfig, NetProcess, Outbox,
    RoundModel, RoundProcess,
};

#[derive(Clone, Debug, PartialEq)]
pub enum ApproxMode {
    /// Lock-step rounds; every live process hears every live value.
    Sync { script: AdversaryScript },
    /// Asynchronous rounds: each round waits for the first `n - f` values.
    Async { seed: u64, max_delay: u64, crashes: Vec<CrashAt> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ApproxConfig {
    pub epsilon: f64,
    pub max_rounds: usize,
    pub mode: ApproxMode,
    /// Reject async runs unless `3f < n`.
    pub enforce_third: bool,
}

impl ApproxConfig {
    pub fn sync(epsilon: f64, max_rounds: usize) -> Self {
        ApproxConfig {
            epsilon,
            max_rounds,
            mode: ApproxMode::Sync { script: AdversaryScript::none() },
            enforce_third: true,
        }
    }

    pub fn asynchronous(epsilon: f64, max_rounds: usize, seed: u64, max_delay: u64) -> Self {
        ApproxConfig {
            epsilon,
            max_rounds,
            mode: ApproxMode::Async { seed, max_delay, crashes: Vec::new() },
            enforce_third: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ApproxRun {
    /// Final value of each process that did not crash.
    pub outputs: Vec<Option<f64>>,
    /// Rounds used by the slowest nonfaulty process.
    pub rounds: usize,
    /// Diameter of nonfaulty values entering each round; the last entry is
    /// the diameter of the outputs.
    pub diameters: Vec<f64>,
    /// `diameters[r + 1] / diameters[r]`, taken as 0 once the diameter is 0.
    pub contraction: Vec<f64>,
    pub nonfaulty: BTreeSet<usize>,
}

impl ApproxRun {
    pub fn output_spread(&self) -> f64 {
        spread(self.outputs.iter().flatten().copied())
    }

    pub fn diameters_nonincreasing(&self) -> bool {
        self.diameters.windows(2).all(|w| w[1] <= w[0])
    }

    /// Every output lies within the range of nonfaulty inputs.
    pub fn valid(&self, inputs: &[f64]) -> bool {
        let lo = self.nonfaulty.iter().map(|&p| inputs[p]).fold(f64::INFINITY, f64::min);
        let hi = self.nonfaulty.iter().map(|&p| inputs[p]).fold(f64::NEG_INFINITY, f64::max);
        self.outputs.iter().flatten().all(|&v| lo <= v && v <= hi)
    }
}

fn spread(values: impl IntoIterator<Item = f64>) -> f64 {
    let (lo, hi) = values
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo > hi {
        0.0
    } else {
        hi - lo
    }
}

/// Per-round nonfaulty diameters from each process's value history. A
/// process that stopped early keeps its final value.
fn diameters(histories: &[Vec<f64>], nonfaulty: &BTreeSet<usize>) -> (Vec<f64>, Vec<f64>) {
    let depth = nonfaulty.iter().map(|&p| histories[p].len()).max().unwrap_or(0);
    let diam: Vec<f64> = (0..depth)
        .map(|r| spread(nonfaulty.iter().map(|&p| *histories[p].get(r).or(histories[p].last()).expect("history starts with input"))))
        .collect();
    let contraction = diam
        .windows(2)
        .map(|w| if w[0] == 0.0 { 0.0 } else { w[1] / w[0] })
        .collect();
    (diam, contraction)
}

/// Approximate agreement by repeated fault-tolerant averaging. A process
/// stops once the values it collected in a round span at most `epsilon`.
pub fn approx_agree(inputs: &[f64], f: usize, config: &ApproxConfig) -> Result<ApproxRun, ConsensusError> {
    let n = inputs.len();
    if n == 0 || f >= n || config.epsilon.is_nan() || config.epsilon <= 0.0 {
        return Err(ConsensusError::InvalidInstance { n, f, k: 1, inputs: n });
    }
    match &config.mode {
        ApproxMode::Sync { script } => sync_run(inputs, f, config, script),
        ApproxMode::Async { seed, max_delay, crashes } => {
            if config.enforce_third && 3 * f >= n {
                return Err(ConsensusError::TooManyFaults(format!(
                    "asynchronous rounds need 3f < n (n={n}, f={f})"
                )));
            }
            async_run(inputs, f, config, *seed, *max_delay, crashes)
        }
    }
}

#[derive(Clone, Debug)]
struct SyncApprox {
    n: usize,
    f: usize,
    epsilon: f64,
    history: Vec<f64>,
    done: bool,
}

impl RoundProcess for SyncApprox {
    type Msg = f64;

    fn send(&self, _round: usize) -> Vec<Option<f64>> {
        vec![self.history.last().copied(); self.n]
    }

    fn receive(&mut self, _round: usize, inbox: &[Option<f64>]) {
        if self.done {
            return;
        }
        let got: Vec<f64> = inbox.iter().flatten().copied().collect();
        let next = ft_average(&got, self.f).unwrap_or(*self.history.last().expect("input"));
        self.history.push(next);
        self.done = spread(got) <= self.epsilon;
    }

    fn halted(&self) -> bool {
        self.done
    }
}

fn sync_run(inputs: &[f64], f: usize, config: &ApproxConfig, script: &AdversaryScript) -> Result<ApproxRun, ConsensusError> {
    let n = inputs.len();
    let procs = inputs
        .iter()
        .map(|&v| SyncApprox { n, f, epsilon: config.epsilon, history: vec![v], done: false })
        .collect();
    let run = run_rounds(procs, RoundModel::crash(n, f), script, config.max_rounds)?;
    let faulty = script.faulty();
    let nonfaulty: BTreeSet<usize> = (0..n).filter(|p| !faulty.contains(p)).collect();
    if nonfaulty.iter().any(|&p| !run.processes[p].done) {
        return Err(ConsensusError::NonTermination { rounds: config.max_rounds });
    }
    let histories: Vec<Vec<f64>> = run.processes.iter().map(|p| p.history.clone()).collect();
    let (diameters, contraction) = diameters(&histories, &nonfaulty);
    Ok(ApproxRun {
        outputs: (0..n)
            .map(|p| run.alive(p).then(|| *histories[p].last().expect("input")))
            .collect(),
        rounds: nonfaulty.iter().map(|&p| histories[p].len() - 1).max().unwrap_or(0),
        diameters,
        contraction,
        nonfaulty,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
enum AsyncMsg {
    Value { round: usize, v: f64 },
    /// The sender's value for every round from `from_round` on.
    Halt { from_round: usize, v: f64 },
}

#[derive(Clone, Debug)]
struct AsyncApprox {
    id: usize,
    n: usize,
    f: usize,
    epsilon: f64,
    max_rounds: usize,
    round: usize,
    history: Vec<f64>,
    /// Values per round, keyed by sender, in arrival order.
    collected: BTreeMap<usize, Vec<(usize, f64)>>,
    halted: BTreeMap<usize, (usize, f64)>,
    started: bool,
    done: bool,
    exhausted: bool,
}

impl AsyncApprox {
    fn deliver(&mut self, from: usize, msg: AsyncMsg, out: &mut Outbox<AsyncMsg>) {
        match msg {
            AsyncMsg::Value { round, v } => {
                let got = self.collected.entry(round).or_default();
                if !got.iter().any(|(q, _)| *q == from) {
                    got.push((from, v));
                }
            }
            AsyncMsg::Halt { from_round, v } => {
                self.halted.insert(from, (from_round, v));
            }
        }
        self.advance(out);
    }

    /// Completes rounds while enough values are in hand.
    fn advance(&mut self, out: &mut Outbox<AsyncMsg>) {
        while !self.done && !self.exhausted {
            let mut got = self.collected.get(&self.round).cloned().unwrap_or_default();
            for (&q, &(from_round, v)) in &self.halted {
                if from_round <= self.round && !got.iter().any(|(p, _)| *p == q) {
                    got.push((q, v));
                }
            }
            if got.len() < self.n - self.f {
                return;
            }
            let values: Vec<f64> = got[..self.n - self.f].iter().map(|(_, v)| *v).collect();
            let next = ft_average(&values, self.f).unwrap_or(*self.history.last().expect("input"));
            self.history.push(next);
            self.round += 1;
            if spread(values) <= self.epsilon {
                self.done = true;
                self.broadcast(AsyncMsg::Halt { from_round: self.round, v: next }, out);
            } else if self.round >= self.max_rounds {
                self.exhausted = true;
            } else {
                self.broadcast(AsyncMsg::Value { round: self.round, v: next }, out);
            }
        }
    }

    fn broadcast(&mut self, msg: AsyncMsg, out: &mut Outbox<AsyncMsg>) {
        match &msg {
            AsyncMsg::Value { round, v } => self.collected.entry(*round).or_default().push((self.id, *v)),
            AsyncMsg::Halt { from_round, v } => {
                self.halted.insert(self.id, (*from_round, *v));
            }
        }
        out.broadcast((0..self.n).filter(|&q| q != self.id), msg);
    }
}

impl NetProcess for AsyncApprox {
    type Msg = AsyncMsg;

    fn on_message(&mut self, _now: u64, from: usize, msg: AsyncMsg, out: &mut Outbox<AsyncMsg>) {
        self.deliver(from, msg, out);
    }

    fn on_tick(&mut self, _now: u64, out: &mut Outbox<AsyncMsg>) {
        if !self.started {
            self.started = true;
            let v = self.history[0];
            self.broadcast(AsyncMsg::Value { round: 0, v }, out);
            self.advance(out);
        }
    }
}

fn async_run(
    inputs: &[f64],
    f: usize,
    config: &ApproxConfig,
    seed: u64,
    max_delay: u64,
    crashes: &[CrashAt],
) -> Result<ApproxRun, ConsensusError> {
    let n = inputs.len();
    let max_delay = max_delay.max(1);
    let procs = inputs
        .iter()
        .enumerate()
        .map(|(id, &v)| AsyncApprox {
            id,
            n,
            f,
            epsilon: config.epsilon,
            max_rounds: config.max_rounds,
            round: 0,
            history: vec![v],
            collected: BTreeMap::new(),
            halted: BTreeMap::new(),
            started: false,
            done: false,
            exhausted: false,
        })
        .collect();
    let horizon = (config.max_rounds as u64 + 2) * (max_delay + 1) * 2;
    let net = NetConfig::new(
        GstModel { gst: u64::MAX, delta: max_delay, f },
        DelayPolicy::Seeded { seed, max_delay },
        horizon,
    )
    .with_crashes(crashes.to_vec());
    let run = run_network(procs, &net, |ps: &[AsyncApprox], crashed| {
        ps.iter().zip(crashed).all(|(p, c)| c.is_some() || p.done || p.exhausted)
    })?;
    let faulty: BTreeSet<usize> = crashes.iter().map(|c| c.process).collect();
    let nonfaulty: BTreeSet<usize> = (0..n).filter(|p| !faulty.contains(p)).collect();
    if nonfaulty.iter().any(|&p| !run.processes[p].done) {
        return Err(ConsensusError::NonTermination { rounds: config.max_rounds });
    }
    let histories: Vec<Vec<f64>> = run.processes.iter().map(|p| p.history.clone()).collect();
    let (diameters, contraction) = diameters(&histories, &nonfaulty);
    Ok(ApproxRun {
        outputs: (0..n)
            .map(|p| run.alive(p).then(|| *histories[p].last().expect("input")))
            .collect(),
        rounds: nonfaulty.iter().map(|&p| histories[p].len() - 1).max().unwrap_or(0),
        diameters,
        contraction,
        nonfaulty,
    })
}
