use std::fmt::Debug;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::log::LogRecord;
use super::script::AdversaryScript;
use super::HarnessError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FailureKind {
    Crash,
    Byzantine,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RoundModel {
    pub n: usize,
    pub f: usize,
    pub kind: FailureKind,
}

impl RoundModel {
    pub fn crash(n: usize, f: usize) -> Self {
        RoundModel { n, f, kind: FailureKind::Crash }
    }

    pub fn byzantine(n: usize, f: usize) -> Self {
        RoundModel { n, f, kind: FailureKind::Byzantine }
    }

    /// Checks a script against this model before any round runs.
    pub fn admit(&self, script: &AdversaryScript) -> Result<(), HarnessError> {
        let faulty = script.faulty();
        if let Some(&p) = faulty.iter().find(|&&p| p >= self.n) {
            return Err(HarnessError::UnknownProcess(p));
        }
        if faulty.len() > self.f {
            return Err(HarnessError::BudgetExceeded { named: faulty.len(), f: self.f });
        }
        if self.kind == FailureKind::Crash && !script.byzantine.is_empty() {
            return Err(HarnessError::WrongFailureKind);
        }
        Ok(())
    }
}

/// A process in the lock-step round model.
pub trait RoundProcess {
    type Msg: Clone + Debug + PartialEq + Serialize + DeserializeOwned;

    /// Messages for `round` (1-based), indexed by recipient.
    fn send(&self, round: usize) -> Vec<Option<Self::Msg>>;

    /// Messages received in `round`, indexed by sender.
    fn receive(&mut self, round: usize, inbox: &[Option<Self::Msg>]);

    fn halted(&self) -> bool {
        false
    }
}

/// `grid[r][from][to]` is the message delivered in round `r + 1`.
pub type MessageGrid<M> = Vec<Vec<Vec<Option<M>>>>;

#[derive(Clone, Debug)]
pub struct RoundRun<P: RoundProcess> {
    pub processes: Vec<P>,
    pub rounds: usize,
    pub grid: MessageGrid<P::Msg>,
    /// Crash round per process.
    pub crashed: Vec<Option<usize>>,
}

impl<P: RoundProcess> RoundRun<P> {
    pub fn alive(&self, p: usize) -> bool {
        self.crashed[p].is_none()
    }

    /// Send and crash records, round by round.
    pub fn log(&self) -> Vec<LogRecord> {
        let mut log = Vec::new();
        for (r, sent) in self.grid.iter().enumerate() {
            let round = r as u64 + 1;
            for (p, row) in sent.iter().enumerate() {
                if self.crashed[p] == Some(r + 1) {
                    log.push(LogRecord::new(round, format!("p{p}"), "crash", "null", round as f64));
                }
                for (to, m) in row.iter().enumerate() {
                    if let Some(m) = m {
                        let payload = serde_json::json!({ "to": to, "msg": m }).to_string();
                        log.push(LogRecord::new(round, format!("p{p}"), "send", payload, round as f64));
                    }
                }
            }
        }
        log
    }
}

/// Runs up to `rounds` lock-step rounds under `script`. Stops early once
/// every live process has halted.
pub fn run_rounds<P: RoundProcess>(
    mut processes: Vec<P>,
    model: RoundModel,
    script: &AdversaryScript,
    rounds: usize,
) -> Result<RoundRun<P>, HarnessError> {
    if processes.len() != model.n {
        return Err(HarnessError::UnknownProcess(processes.len()));
    }
    model.admit(script)?;
    let n = model.n;
    let mut forged = Vec::new();
    for b in &script.byzantine {
        let msg = match &b.message {
            serde_json::Value::Null => None,
            m => Some(
                serde_json::from_value::<P::Msg>(m.clone())
                    .map_err(|e| HarnessError::BadScript(format!("forged message: {e}")))?,
            ),
        };
        forged.push((b, msg));
    }

    let mut crashed: Vec<Option<usize>> = vec![None; n];
    let mut grid = Vec::new();
    let mut executed = 0;
    for round in 1..=rounds {
        let live_halted = (0..n).filter(|&p| crashed[p].is_none()).all(|p| processes[p].halted());
        if live_halted {
            break;
        }
        executed = round;
        let mut sent: Vec<Vec<Option<P::Msg>>> = vec![vec![None; n]; n];
        for p in 0..n {
            if crashed[p].is_some() {
                continue;
            }
            let mut out = processes[p].send(round);
            out.resize(n, None);
            for (b, msg) in forged.iter().filter(|(b, _)| b.process == p && b.round == round) {
                if b.to < n {
                    out[b.to] = msg.clone();
                }
            }
            if let Some(c) = script.crash_of(p).filter(|c| c.round == round) {
                for (to, slot) in out.iter_mut().enumerate() {
                    if !c.deliver_to.contains(&to) {
                        *slot = None;
                    }
                }
                crashed[p] = Some(round);
            }
            sent[p] = out;
        }
        for q in 0..n {
            if crashed[q].is_some() {
                continue;
            }
            let inbox: Vec<Option<P::Msg>> = (0..n).map(|p| sent[p][q].clone()).collect();
            processes[q].receive(round, &inbox);
        }
        grid.push(sent);
    }
    Ok(RoundRun {
        processes,
        rounds: executed,
        grid,
        crashed,
    })
}
