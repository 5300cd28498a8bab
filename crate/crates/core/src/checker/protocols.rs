//! Message-passing consensus protocols over asynchronous FIFO channels, as
//! finite configuration graphs with at most a budgeted number of crashes.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::automata::{Action, Automaton, Behavior, Signature};
use crate::value::Value;

/// Messages emitted by a local step: `(destination, message)`.
pub type Outbox = Vec<(usize, Value)>;

/// A per-process consensus state machine. Processes take one local `start`
/// step, then react only to message deliveries.
pub trait Protocol: Send + Sync {
    fn name(&self) -> String;
    fn n(&self) -> usize;
    fn initial(&self, p: usize, input: i64) -> Value;
    fn start(&self, p: usize, local: &Value) -> (Value, Outbox);
    fn receive(&self, p: usize, local: &Value, from: usize, msg: &Value) -> (Value, Outbox);
    fn decision(&self, local: &Value) -> Option<i64>;
}

/// A protocol instantiated over a set of input vectors with a crash budget.
///
/// Configuration layout: `{inputs, local, started, crashed, crashes, chan}`
/// where `chan[f * n + t]` is the FIFO queue from `f` to `t`. Actions are
/// `start_p` (task `p{p}`), `deliver_f_t` (task `ch_f_t`), and the input
/// `crash_p`, which is a no-op once the budget is spent.
#[derive(Clone)]
pub struct ProtocolSystem {
    pub protocol: Arc<dyn Protocol>,
    pub inputs: Vec<Vec<i64>>,
    pub crash_budget: usize,
}

impl std::fmt::Debug for ProtocolSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProtocolSystem")
            .field("protocol", &self.protocol.name())
            .field("inputs", &self.inputs)
            .field("crash_budget", &self.crash_budget)
            .finish()
    }
}

impl ProtocolSystem {
    /// All binary input vectors, one crash allowed.
    pub fn binary(protocol: impl Protocol + 'static) -> Self {
        let n = protocol.n();
        let inputs = (0..1u32 << n)
            .map(|bits| (0..n).map(|p| i64::from((bits >> p) & 1)).collect())
            .collect();
        ProtocolSystem {
            protocol: Arc::new(protocol),
            inputs,
            crash_budget: 1,
        }
    }

    pub fn with_inputs(mut self, inputs: Vec<Vec<i64>>) -> Self {
        self.inputs = inputs;
        self
    }

    pub fn with_crash_budget(mut self, budget: usize) -> Self {
        self.crash_budget = budget;
        self
    }

    pub fn n(&self) -> usize {
        self.protocol.n()
    }

    pub fn initial_config(&self, inputs: &[i64]) -> Value {
        let n = self.n();
        Value::record([
            ("inputs", Value::list(inputs.iter().map(|&v| Value::Int(v)))),
            (
                "local",
                Value::list((0..n).map(|p| self.protocol.initial(p, inputs[p]))),
            ),
            ("started", Value::list((0..n).map(|_| Value::Bool(false)))),
            ("crashed", Value::list((0..n).map(|_| Value::Bool(false)))),
            ("crashes", Value::Int(0)),
            ("chan", Value::list((0..n * n).map(|_| Value::list([])))),
        ])
    }

    pub fn decisions(&self, config: &Value) -> Vec<Option<i64>> {
        locals(config)
            .iter()
            .map(|l| self.protocol.decision(l))
            .collect()
    }

    /// Set of values decided by any process, crashed or not.
    pub fn decided_values(&self, config: &Value) -> BTreeSet<i64> {
        self.decisions(config).into_iter().flatten().collect()
    }

    pub fn crashed(config: &Value, p: usize) -> bool {
        flag(config, "crashed", p)
    }

    pub fn crash_count(config: &Value) -> usize {
        config.get("crashes").and_then(Value::as_int).unwrap_or(0) as usize
    }

    pub fn config_inputs(config: &Value) -> Vec<i64> {
        config
            .get("inputs")
            .and_then(Value::as_list)
            .map(|l| l.iter().filter_map(Value::as_int).collect())
            .unwrap_or_default()
    }

    /// Two processes decided different values.
    pub fn agreement_violated(&self, config: &Value) -> bool {
        self.decided_values(config).len() > 1
    }

    /// Some process decided a value that is nobody's input.
    pub fn validity_violated(&self, config: &Value) -> bool {
        let inputs = Self::config_inputs(config);
        self.decided_values(config).iter().any(|v| !inputs.contains(v))
    }

    pub fn automaton(&self) -> Automaton {
        let n = self.n();
        let mut signature = Signature::new();
        let mut tasks = BTreeMap::new();
        for p in 0..n {
            signature = signature.input(format!("crash_{p}")).internal(format!("start_{p}"));
            tasks.insert(format!("p{p}"), BTreeSet::from([format!("start_{p}")]));
            for t in 0..n {
                let name = format!("deliver_{p}_{t}");
                signature = signature.internal(name.clone());
                tasks.insert(format!("ch_{p}_{t}"), BTreeSet::from([name]));
            }
        }
        let starts = self.inputs.iter().map(|i| self.initial_config(i)).collect();
        Automaton::new(
            self.protocol.name(),
            signature,
            starts,
            tasks,
            ProtocolBehavior(self.clone()),
        )
        .expect("protocol automaton is well formed")
    }
}

fn locals(config: &Value) -> &[Value] {
    config.get("local").and_then(Value::as_list).unwrap_or(&[])
}

fn flag(config: &Value, field: &str, p: usize) -> bool {
    config
        .get(field)
        .and_then(|l| l.at(p))
        .and_then(Value::as_bool)
        .unwrap_or(false)
}

fn set_at(config: &mut Value, field: &str, p: usize, v: Value) {
    if let Some(list) = config.get_mut(field).and_then(Value::as_list_mut) {
        list[p] = v;
    }
}

fn post(config: &mut Value, n: usize, from: usize, outbox: Outbox) {
    let chans = config
        .get_mut("chan")
        .and_then(Value::as_list_mut)
        .expect("config has channels");
    for (to, msg) in outbox {
        chans[from * n + to]
            .as_list_mut()
            .expect("channel is a list")
            .push(msg);
    }
}

struct ProtocolBehavior(ProtocolSystem);

impl Behavior for ProtocolBehavior {
    fn enabled(&self, config: &Value) -> Vec<(Action, Value)> {
        let sys = &self.0;
        let n = sys.n();
        let mut out = Vec::new();
        for p in 0..n {
            if flag(config, "started", p) || ProtocolSystem::crashed(config, p) {
                continue;
            }
            let (local, outbox) = sys.protocol.start(p, &locals(config)[p]);
            let mut next = config.clone();
            set_at(&mut next, "local", p, local);
            set_at(&mut next, "started", p, Value::Bool(true));
            post(&mut next, n, p, outbox);
            out.push((Action::bare(format!("start_{p}")), next));
        }
        let chans = config.get("chan").and_then(Value::as_list).unwrap_or(&[]);
        for (idx, queue) in chans.iter().enumerate() {
            let Some(msg) = queue.as_list().and_then(<[Value]>::first) else {
                continue;
            };
            let (from, to) = (idx / n, idx % n);
            let mut next = config.clone();
            next.get_mut("chan").and_then(Value::as_list_mut).expect("channels")[idx]
                .as_list_mut()
                .expect("queue")
                .remove(0);
            if !ProtocolSystem::crashed(config, to) {
                let (local, outbox) = sys.protocol.receive(to, &locals(config)[to], from, msg);
                set_at(&mut next, "local", to, local);
                post(&mut next, n, to, outbox);
            }
            out.push((Action::new(format!("deliver_{from}_{to}"), msg.clone()), next));
        }
        out
    }

    fn on_input(&self, config: &Value, action: &Action) -> Option<Value> {
        let p: usize = action.name.strip_prefix("crash_")?.parse().ok()?;
        if p >= self.0.n() {
            return None;
        }
        let crashes = ProtocolSystem::crash_count(config);
        if ProtocolSystem::crashed(config, p) || crashes >= self.0.crash_budget {
            return Some(config.clone());
        }
        let mut next = config.clone();
        set_at(&mut next, "crashed", p, Value::Bool(true));
        *next.get_mut("crashes").expect("crash counter") = Value::Int(crashes as i64 + 1);
        Some(next)
    }

    fn input_alphabet(&self) -> Vec<Action> {
        (0..self.0.n()).map(|p| Action::bare(format!("crash_{p}"))).collect()
    }
}

fn msg(tag: &str, v: i64) -> Value {
    Value::record([("t", Value::str(tag)), ("v", Value::Int(v))])
}

fn msg_parts(m: &Value) -> (&str, i64) {
    (
        m.get("t").and_then(Value::as_str).unwrap_or(""),
        m.get("v").and_then(Value::as_int).unwrap_or(0),
    )
}

fn dec_of(local: &Value) -> Option<i64> {
    local.get("dec").and_then(Value::as_int)
}

/// Two processes; process 0 arbitrates and decides whichever vote reaches
/// it first, then forwards the decision.
#[derive(Clone, Copy, Debug, Default)]
pub struct FirstVote2;

impl Protocol for FirstVote2 {
    fn name(&self) -> String {
        "first-vote-2".into()
    }
    fn n(&self) -> usize {
        2
    }
    fn initial(&self, _p: usize, input: i64) -> Value {
        Value::record([("input", Value::Int(input)), ("dec", Value::Unit)])
    }
    fn start(&self, _p: usize, local: &Value) -> (Value, Outbox) {
        let input = local.get("input").and_then(Value::as_int).unwrap_or(0);
        (local.clone(), vec![(0, msg("vote", input))])
    }
    fn receive(&self, p: usize, local: &Value, _from: usize, m: &Value) -> (Value, Outbox) {
        match msg_parts(m) {
            ("vote", v) if p == 0 && dec_of(local).is_none() => {
                (local.with("dec", Value::Int(v)), vec![(1, msg("decide", v))])
            }
            ("decide", v) => (local.with("dec", Value::Int(v)), Vec::new()),
            _ => (local.clone(), Vec::new()),
        }
    }
    fn decision(&self, local: &Value) -> Option<i64> {
        dec_of(local)
    }
}

/// Three processes; process 0 collects votes, decides the minimum of the
/// first two to arrive and relays the decision.
#[derive(Clone, Copy, Debug, Default)]
pub struct QuorumVote3;

impl Protocol for QuorumVote3 {
    fn name(&self) -> String {
        "quorum-vote-3".into()
    }
    fn n(&self) -> usize {
        3
    }
    fn initial(&self, _p: usize, input: i64) -> Value {
        Value::record([
            ("input", Value::Int(input)),
            ("got", Value::list([])),
            ("dec", Value::Unit),
        ])
    }
    fn start(&self, _p: usize, local: &Value) -> (Value, Outbox) {
        let input = local.get("input").and_then(Value::as_int).unwrap_or(0);
        (local.clone(), vec![(0, msg("vote", input))])
    }
    fn receive(&self, p: usize, local: &Value, _from: usize, m: &Value) -> (Value, Outbox) {
        match msg_parts(m) {
            ("vote", v) if p == 0 && dec_of(local).is_none() => {
                let mut got: Vec<i64> = local
                    .get("got")
                    .and_then(Value::as_list)
                    .map(|l| l.iter().filter_map(Value::as_int).collect())
                    .unwrap_or_default();
                got.push(v);
                if got.len() == 2 {
                    let d = got[0].min(got[1]);
                    let next = local.with("got", Value::list([])).with("dec", Value::Int(d));
                    (next, vec![(1, msg("decide", d)), (2, msg("decide", d))])
                } else {
                    (local.with("got", Value::list(got.into_iter().map(Value::Int))), Vec::new())
                }
            }
            ("decide", v) => (local.with("dec", Value::Int(v)), Vec::new()),
            _ => (local.clone(), Vec::new()),
        }
    }
    fn decision(&self, local: &Value) -> Option<i64> {
        dec_of(local)
    }
}

/// Three processes with a rotating coordinator. Everyone votes its
/// preference to the coordinator of the current round. The coordinator
/// decides on a unanimous round; otherwise it adopts the first vote it
/// received, hands the round on, and the next coordinator takes over.
#[derive(Clone, Copy, Debug, Default)]
pub struct Rotating3;

impl Rotating3 {
    const N: usize = 3;

    fn votes(local: &Value) -> Vec<i64> {
        local
            .get("votes")
            .and_then(Value::as_list)
            .map(|l| l.iter().filter_map(Value::as_int).collect())
            .unwrap_or_default()
    }

    fn field(local: &Value, name: &str) -> i64 {
        local.get(name).and_then(Value::as_int).unwrap_or(0)
    }

    /// Closes the round if `p` coordinates it and holds every vote.
    fn try_close(p: usize, local: Value, mut out: Outbox) -> (Value, Outbox) {
        let votes = Self::votes(&local);
        if Self::field(&local, "round") as usize != p || votes.len() < Self::N || dec_of(&local).is_some() {
            return (local, out);
        }
        if votes.iter().all(|&v| v == votes[0]) {
            let d = votes[0];
            out.extend((0..Self::N).filter(|&q| q != p).map(|q| (q, msg("decide", d))));
            return (local.with("votes", Value::list([])).with("dec", Value::Int(d)), out);
        }
        let pref = votes[0];
        let round = (p + 1) % Self::N;
        out.extend((0..Self::N).filter(|&q| q != p).map(|q| (q, msg("next", 0))));
        out.push((round, msg("vote", pref)));
        let next = local
            .with("votes", Value::list([]))
            .with("pref", Value::Int(pref))
            .with("round", Value::Int(round as i64));
        (next, out)
    }
}

impl Protocol for Rotating3 {
    fn name(&self) -> String {
        "rotating-3".into()
    }
    fn n(&self) -> usize {
        Self::N
    }
    fn initial(&self, _p: usize, input: i64) -> Value {
        Value::record([
            ("pref", Value::Int(input)),
            ("round", Value::Int(0)),
            ("votes", Value::list([])),
            ("dec", Value::Unit),
        ])
    }
    fn start(&self, _p: usize, local: &Value) -> (Value, Outbox) {
        (local.clone(), vec![(0, msg("vote", Self::field(local, "pref")))])
    }
    fn receive(&self, p: usize, local: &Value, _from: usize, m: &Value) -> (Value, Outbox) {
        if dec_of(local).is_some() {
            return (local.clone(), Vec::new());
        }
        match msg_parts(m) {
            ("vote", v) => {
                let mut votes = Self::votes(local);
                votes.push(v);
                let next = local.with("votes", Value::list(votes.into_iter().map(Value::Int)));
                Self::try_close(p, next, Vec::new())
            }
            ("next", _) => {
                let round = (Self::field(local, "round") as usize + 1) % Self::N;
                let next = local.with("round", Value::Int(round as i64));
                let out = vec![(round, msg("vote", Self::field(local, "pref")))];
                Self::try_close(p, next, out)
            }
            ("decide", v) => (local.with("dec", Value::Int(v)), Vec::new()),
            _ => (local.clone(), Vec::new()),
        }
    }
    fn decision(&self, local: &Value) -> Option<i64> {
        dec_of(local)
    }
}

/// Two processes exchange votes and each decides the minimum it has seen.
/// Every initial configuration is univalent.
#[derive(Clone, Copy, Debug, Default)]
pub struct VoteMin2;

impl Protocol for VoteMin2 {
    fn name(&self) -> String {
        "vote-min-2".into()
    }
    fn n(&self) -> usize {
        2
    }
    fn initial(&self, _p: usize, input: i64) -> Value {
        Value::record([("input", Value::Int(input)), ("dec", Value::Unit)])
    }
    fn start(&self, p: usize, local: &Value) -> (Value, Outbox) {
        let input = local.get("input").and_then(Value::as_int).unwrap_or(0);
        (local.clone(), vec![(1 - p, msg("vote", input))])
    }
    fn receive(&self, _p: usize, local: &Value, _from: usize, m: &Value) -> (Value, Outbox) {
        let input = local.get("input").and_then(Value::as_int).unwrap_or(0);
        match msg_parts(m) {
            ("vote", v) => (local.with("dec", Value::Int(input.min(v))), Vec::new()),
            _ => (local.clone(), Vec::new()),
        }
    }
    fn decision(&self, local: &Value) -> Option<i64> {
        dec_of(local)
    }
}

/// Each process decides its own input on its first step. Violates agreement.
#[derive(Clone, Copy, Debug, Default)]
pub struct DecideOwnInput;

impl Protocol for DecideOwnInput {
    fn name(&self) -> String {
        "decide-own-input".into()
    }
    fn n(&self) -> usize {
        2
    }
    fn initial(&self, _p: usize, input: i64) -> Value {
        Value::record([("input", Value::Int(input)), ("dec", Value::Unit)])
    }
    fn start(&self, _p: usize, local: &Value) -> (Value, Outbox) {
        let input = local.get("input").cloned().unwrap_or(Value::Int(0));
        (local.with("dec", input), Vec::new())
    }
    fn receive(&self, _p: usize, local: &Value, _from: usize, _m: &Value) -> (Value, Outbox) {
        (local.clone(), Vec::new())
    }
    fn decision(&self, local: &Value) -> Option<i64> {
        dec_of(local)
    }
}

/// The shipped agreement toys, each over all binary inputs with one crash.
pub fn shipped_protocols() -> Vec<ProtocolSystem> {
    vec![
        ProtocolSystem::binary(FirstVote2),
        ProtocolSystem::binary(QuorumVote3),
        ProtocolSystem::binary(Rotating3),
    ]
}
