use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ConsensusError, ConsensusInstance};
use crate::harness::{run_rounds, AdversaryScript, CrashEvent, LogRecord, RoundModel, RoundProcess, RoundRun};

/// Rounds FloodMin needs for `k`-set agreement with `f` crashes.
pub fn flood_min_rounds(f: usize, k: usize) -> usize {
    f / k + 1
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FloodMinProcess {
    n: usize,
    rounds: usize,
    pub min: i64,
    /// Minimum held after each round.
    pub history: Vec<i64>,
    pub decision: Option<i64>,
}

impl RoundProcess for FloodMinProcess {
    type Msg = i64;

    fn send(&self, _round: usize) -> Vec<Option<i64>> {
        vec![Some(self.min); self.n]
    }

    fn receive(&mut self, round: usize, inbox: &[Option<i64>]) {
        self.min = inbox.iter().flatten().fold(self.min, |m, &v| m.min(v));
        self.history.push(self.min);
        if round == self.rounds {
            self.decision = Some(self.min);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FloodMinRun {
    pub rounds: usize,
    /// `None` for crashed processes.
    pub decisions: Vec<Option<i64>>,
    /// Per process, the minimum after each round it completed.
    pub minima: Vec<Vec<i64>>,
    pub crashed: Vec<Option<usize>>,
}

impl FloodMinRun {
    pub fn distinct_decisions(&self) -> BTreeSet<i64> {
        self.decisions.iter().flatten().copied().collect()
    }

    /// Every decision is some process's input.
    pub fn valid(&self, inputs: &[i64]) -> bool {
        self.decisions.iter().flatten().all(|d| inputs.contains(d))
    }

    /// Minima of the processes alive through `round`.
    pub fn minima_after(&self, round: usize) -> Vec<i64> {
        self.minima
            .iter()
            .filter_map(|h| h.get(round - 1).copied())
            .collect()
    }
}

pub fn flood_min(instance: &ConsensusInstance, script: &AdversaryScript) -> Result<FloodMinRun, ConsensusError> {
    let run = flood_min_raw(instance, script)?;
    Ok(FloodMinRun {
        rounds: run.rounds,
        decisions: run
            .processes
            .iter()
            .enumerate()
            .map(|(p, s)| if run.alive(p) { s.decision } else { None })
            .collect(),
        minima: run.processes.iter().map(|s| s.history.clone()).collect(),
        crashed: run.crashed,
    })
}

/// Message-level log of the run `flood_min` would perform.
pub fn flood_min_log(instance: &ConsensusInstance, script: &AdversaryScript) -> Result<Vec<LogRecord>, ConsensusError> {
    Ok(flood_min_raw(instance, script)?.log())
}

fn flood_min_raw(
    instance: &ConsensusInstance,
    script: &AdversaryScript,
) -> Result<RoundRun<FloodMinProcess>, ConsensusError> {
    let rounds = flood_min_rounds(instance.f, instance.k);
    let procs = instance
        .inputs
        .iter()
        .map(|&v| FloodMinProcess {
            n: instance.n,
            rounds,
            min: v,
            history: Vec::new(),
            decision: None,
        })
        .collect();
    Ok(run_rounds(procs, RoundModel::crash(instance.n, instance.f), script, rounds)?)
}

/// The chain schedule: in round `r`, process `r - 1` crashes and reaches
/// only process `r`. The low value of process 0 is relayed one hop per
/// round and stays hidden from the others until round `f + 1`.
pub fn chain_script(f: usize) -> AdversaryScript {
    AdversaryScript::crashes((1..=f).map(|r| CrashEvent::new(r - 1, r, [r])))
}

/// Calls `visit` with every crash script on `n` processes with at most `f`
/// crashes, each in a round of `1..=rounds` reaching any subset of the
/// other processes.
pub fn for_each_crash_script(n: usize, f: usize, rounds: usize, mut visit: impl FnMut(&[CrashEvent])) {
    fn go(
        p: usize,
        n: usize,
        budget: usize,
        rounds: usize,
        acc: &mut Vec<CrashEvent>,
        visit: &mut dyn FnMut(&[CrashEvent]),
    ) {
        if p == n {
            visit(acc);
            return;
        }
        go(p + 1, n, budget, rounds, acc, visit);
        if budget == 0 {
            return;
        }
        let others: Vec<usize> = (0..n).filter(|&q| q != p).collect();
        for round in 1..=rounds {
            for mask in 0..1u32 << others.len() {
                let to = others
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &q)| q);
                acc.push(CrashEvent::new(p, round, to));
                go(p + 1, n, budget - 1, rounds, acc, visit);
                acc.pop();
            }
        }
    }
    go(0, n, f, rounds, &mut Vec::new(), &mut visit);
}

/// A seeded crash script: up to `f` distinct processes crash, each in a
/// uniform round of `1..=rounds` reaching a uniform subset of the others.
pub fn random_crash_script(n: usize, f: usize, rounds: usize, seed: u64) -> AdversaryScript {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<usize> = (0..n).collect();
    let crashes = rng.random_range(0..=f.min(n));
    let events: Vec<CrashEvent> = (0..crashes)
        .map(|_| {
            let p = pool.swap_remove(rng.random_range(0..pool.len()));
            let round = rng.random_range(1..=rounds.max(1));
            let to: Vec<usize> = (0..n).filter(|&q| q != p && rng.random_bool(0.5)).collect();
            CrashEvent::new(p, round, to)
        })
        .collect();
    AdversaryScript::crashes(events)
}
