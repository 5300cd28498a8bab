use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::log::LogRecord;
use super::HarnessError;

/// Partial synchrony: delays are arbitrary before `gst`; afterwards every
/// message is delivered within `delta` steps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GstModel {
    pub gst: u64,
    pub delta: u64,
    pub f: usize,
}

impl GstModel {
    /// Latest step a message sent at `sent` may be delivered.
    pub fn deadline(&self, sent: u64) -> u64 {
        sent.max(self.gst).saturating_add(self.delta)
    }
}

/// Delay for messages matching all given fields, sent in `[from_step, to_step)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelayRule {
    #[serde(default)]
    pub from: Option<usize>,
    #[serde(default)]
    pub to: Option<usize>,
    #[serde(default)]
    pub from_step: u64,
    #[serde(default = "forever")]
    pub to_step: u64,
    pub delay: u64,
}

fn forever() -> u64 {
    u64::MAX
}

/// How delays are chosen before stabilization. Every choice is clamped to
/// the model deadline.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum DelayPolicy {
    /// Uniform in `1..=max_delay` before GST and `1..=delta` after.
    Seeded { seed: u64, max_delay: u64 },
    /// Nothing is delivered before GST; afterwards the full `delta`.
    HoldUntilGst,
    /// First matching rule wins; unmatched messages take `delta`.
    Scripted(Vec<DelayRule>),
}

/// Cross-group messages sent during `[from, until)` are dropped.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub groups: Vec<Vec<usize>>,
    pub from: u64,
    pub until: u64,
}

impl Partition {
    pub fn separates(&self, a: usize, b: usize, at: u64) -> bool {
        if at < self.from || at >= self.until {
            return false;
        }
        let group = |x: usize| self.groups.iter().position(|g| g.contains(&x));
        group(a) != group(b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrashAt {
    pub process: usize,
    pub step: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetConfig {
    pub model: GstModel,
    pub policy: DelayPolicy,
    pub crashes: Vec<CrashAt>,
    pub partitions: Vec<Partition>,
    pub horizon: u64,
}

impl NetConfig {
    pub fn new(model: GstModel, policy: DelayPolicy, horizon: u64) -> Self {
        NetConfig {
            model,
            policy,
            crashes: Vec::new(),
            partitions: Vec::new(),
            horizon,
        }
    }

    pub fn with_crashes(mut self, crashes: Vec<CrashAt>) -> Self {
        self.crashes = crashes;
        self
    }

    pub fn with_partition(mut self, p: Partition) -> Self {
        self.partitions.push(p);
        self
    }
}

/// Messages queued by a process during one callback.
#[derive(Debug)]
pub struct Outbox<M> {
    pub(crate) msgs: Vec<(usize, M)>,
}

impl<M: Clone> Outbox<M> {
    pub fn new() -> Self {
        Outbox { msgs: Vec::new() }
    }

    pub fn send(&mut self, to: usize, msg: M) {
        self.msgs.push((to, msg));
    }

    pub fn broadcast(&mut self, to: impl IntoIterator<Item = usize>, msg: M) {
        for t in to {
            self.msgs.push((t, msg.clone()));
        }
    }

    pub fn drain(&mut self) -> Vec<(usize, M)> {
        std::mem::take(&mut self.msgs)
    }
}

impl<M: Clone> Default for Outbox<M> {
    fn default() -> Self {
        Self::new()
    }
}

/// A process driven by the network simulator. Each step delivers due
/// messages, then ticks every live process once.
pub trait NetProcess {
    type Msg: Clone + Debug + Serialize;

    fn on_message(&mut self, now: u64, from: usize, msg: Self::Msg, out: &mut Outbox<Self::Msg>);

    fn on_tick(&mut self, now: u64, out: &mut Outbox<Self::Msg>);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Delivery {
    pub from: usize,
    pub to: usize,
    pub sent: u64,
    pub delivered: u64,
}

#[derive(Clone, Debug)]
pub struct NetRun<P> {
    pub processes: Vec<P>,
    pub crashed: Vec<Option<u64>>,
    pub deliveries: Vec<Delivery>,
    pub dropped: usize,
    /// Last step executed.
    pub steps: u64,
    pub log: Vec<LogRecord>,
}

impl<P> NetRun<P> {
    pub fn alive(&self, p: usize) -> bool {
        self.crashed[p].is_none()
    }
}

struct InFlight<M> {
    from: usize,
    to: usize,
    sent: u64,
    msg: M,
}

/// Runs until `horizon`, or until `stop` holds after a step.
pub fn run_network<P: NetProcess>(
    mut processes: Vec<P>,
    config: &NetConfig,
    stop: impl Fn(&[P], &[Option<u64>]) -> bool,
) -> Result<NetRun<P>, HarnessError> {
    let n = processes.len();
    let model = config.model;
    let faulty: BTreeSet<usize> = config.crashes.iter().map(|c| c.process).collect();
    if let Some(&p) = faulty.iter().find(|&&p| p >= n) {
        return Err(HarnessError::UnknownProcess(p));
    }
    if faulty.len() > model.f {
        return Err(HarnessError::BudgetExceeded { named: faulty.len(), f: model.f });
    }
    if model.delta == 0 {
        return Err(HarnessError::BadSchedule("delta must be positive".into()));
    }

    let mut rng = match config.policy {
        DelayPolicy::Seeded { seed, .. } => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    let mut crashed: Vec<Option<u64>> = vec![None; n];
    let mut queue: BTreeMap<(u64, u64), InFlight<P::Msg>> = BTreeMap::new();
    let mut seq = 0u64;
    let mut deliveries = Vec::new();
    let mut dropped = 0;
    let mut log = Vec::new();
    let mut last = 0;

    let mut post = |from: usize,
                    now: u64,
                    msgs: Vec<(usize, P::Msg)>,
                    queue: &mut BTreeMap<(u64, u64), InFlight<P::Msg>>,
                    log: &mut Vec<LogRecord>,
                    dropped: &mut usize| {
        for (to, msg) in msgs {
            let payload = serde_json::json!({ "to": to, "msg": &msg }).to_string();
            log.push(LogRecord::new(now, format!("p{from}"), "send", payload, now as f64));
            if config.partitions.iter().any(|p| p.separates(from, to, now)) {
                *dropped += 1;
                continue;
            }
            let wanted = match &config.policy {
                DelayPolicy::Seeded { max_delay, .. } => {
                    let rng = rng.as_mut().expect("seeded policy has an rng");
                    let hi = if now >= model.gst { model.delta } else { (*max_delay).max(1) };
                    rng.random_range(1..=hi)
                }
                DelayPolicy::HoldUntilGst => model.deadline(now) - now,
                DelayPolicy::Scripted(rules) => rules
                    .iter()
                    .find(|r| {
                        r.from.is_none_or(|f| f == from)
                            && r.to.is_none_or(|t| t == to)
                            && (r.from_step..r.to_step).contains(&now)
                    })
                    .map_or(model.delta, |r| r.delay),
            };
            let at = now.saturating_add(wanted.max(1)).min(model.deadline(now));
            queue.insert((at, seq), InFlight { from, to, sent: now, msg });
            seq += 1;
        }
    };

    for now in 0..=config.horizon {
        last = now;
        for c in &config.crashes {
            if c.step == now && crashed[c.process].is_none() {
                crashed[c.process] = Some(now);
                log.push(LogRecord::new(now, format!("p{}", c.process), "crash", "null", now as f64));
            }
        }
        while let Some(entry) = queue.first_entry() {
            if entry.key().0 > now {
                break;
            }
            let m = entry.remove();
            assert!(
                now <= model.deadline(m.sent),
                "delivery at {now} of a message sent at {} breaks the stabilization bound",
                m.sent
            );
            if crashed[m.to].is_some() {
                continue;
            }
            deliveries.push(Delivery { from: m.from, to: m.to, sent: m.sent, delivered: now });
            let payload = serde_json::json!({ "from": m.from, "msg": &m.msg }).to_string();
            log.push(LogRecord::new(now, format!("p{}", m.to), "deliver", payload, now as f64));
            let mut out = Outbox::new();
            processes[m.to].on_message(now, m.from, m.msg, &mut out);
            post(m.to, now, out.drain(), &mut queue, &mut log, &mut dropped);
        }
        for p in 0..n {
            if crashed[p].is_some() {
                continue;
            }
            let mut out = Outbox::new();
            processes[p].on_tick(now, &mut out);
            post(p, now, out.drain(), &mut queue, &mut log, &mut dropped);
        }
        if stop(&processes, &crashed) {
            break;
        }
    }
    Ok(NetRun {
        processes,
        crashed,
        deliveries,
        dropped,
        steps: last,
        log,
    })
}
