use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::history::{Event, History, OpKind, Phase};
use crate::harness::{run_network, HarnessError, LogRecord, NetConfig, NetProcess, Outbox};

/// `(sequence number, writer)`, ordered lexicographically.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Tag {
    pub seq: u64,
    pub writer: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Op {
    Read,
    Write(i64),
}

/// Client `client` issues `op` once it is idle and step `at` has come.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClientOp {
    pub client: usize,
    pub at: u64,
    pub op: Op,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum RegisterMsg {
    Query { op: u64 },
    QueryReply { op: u64, tag: Tag, value: i64 },
    Update { op: u64, tag: Tag, value: i64 },
    UpdateAck { op: u64 },
    /// Replica-to-replica propagation in the local-first register.
    Gossip { tag: Tag, value: i64 },
    /// Local-first client request and its immediate answer.
    Local { op: u64, write: Option<i64> },
    LocalReply { op: u64, value: i64 },
}

/// Which register the clients talk to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    /// Majority quorums: query for the highest tag, then update a majority.
    Quorum,
    /// Each client uses one home replica; replicas gossip in the background.
    Local,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegisterConfig {
    pub servers: usize,
    pub clients: usize,
    pub protocol: Protocol,
    pub script: Vec<ClientOp>,
    pub net: NetConfig,
    /// Steps between retransmissions of an unanswered request.
    pub retry: u64,
    /// Home replica per client for the local-first register; clients
    /// without an entry use `client mod servers`.
    pub homes: Vec<usize>,
}

impl RegisterConfig {
    /// Network node of client `c`.
    pub fn client_node(&self, c: usize) -> usize {
        self.servers + c
    }

    /// Home replica of client `c` in the local-first register.
    pub fn home(&self, c: usize) -> usize {
        self.homes.get(c).copied().unwrap_or(c % self.servers)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegisterRun {
    pub history: History,
    /// Tag of each replica after each change.
    pub replica_tags: Vec<Vec<Tag>>,
    /// Operations invoked at live clients that never responded.
    pub unavailable: usize,
    pub steps: u64,
    pub log: Vec<LogRecord>,
}

impl RegisterRun {
    pub fn tags_monotone(&self) -> bool {
        self.replica_tags.iter().all(|t| t.windows(2).all(|w| w[0] <= w[1]))
    }
}

#[derive(Clone, Debug)]
struct Server {
    id: usize,
    servers: usize,
    tag: Tag,
    value: i64,
    tags: Vec<Tag>,
    gossip: bool,
}

impl Server {
    fn adopt(&mut self, tag: Tag, value: i64) -> bool {
        if tag > self.tag {
            self.tag = tag;
            self.value = value;
            self.tags.push(tag);
            true
        } else {
            false
        }
    }

    fn on_message(&mut self, from: usize, msg: RegisterMsg, out: &mut Outbox<RegisterMsg>) {
        match msg {
            RegisterMsg::Query { op } => out.send(from, RegisterMsg::QueryReply { op, tag: self.tag, value: self.value }),
            RegisterMsg::Update { op, tag, value } => {
                self.adopt(tag, value);
                out.send(from, RegisterMsg::UpdateAck { op });
            }
            RegisterMsg::Gossip { tag, value } => {
                self.adopt(tag, value);
            }
            RegisterMsg::Local { op, write } => {
                if let Some(v) = write {
                    let tag = Tag { seq: self.tag.seq + 1, writer: self.id };
                    self.adopt(tag, v);
                    self.spread(out);
                }
                out.send(from, RegisterMsg::LocalReply { op, value: self.value });
            }
            _ => {}
        }
    }

    fn spread(&self, out: &mut Outbox<RegisterMsg>) {
        let msg = RegisterMsg::Gossip { tag: self.tag, value: self.value };
        out.broadcast((0..self.servers).filter(|&s| s != self.id), msg);
    }
}

#[derive(Clone, Debug)]
enum Stage {
    Idle,
    Query { replies: BTreeMap<usize, (Tag, i64)> },
    Update { acks: BTreeSet<usize>, tag: Tag, value: i64 },
    Local,
}

#[derive(Clone, Debug)]
struct Client {
    index: usize,
    servers: usize,
    home: usize,
    protocol: Protocol,
    retry: u64,
    todo: Vec<(u64, Op)>,
    current: Option<Op>,
    op: u64,
    stage: Stage,
    last_sent: u64,
    /// `(step, stage, event)`; responses sort before invocations in a step.
    events: Vec<(u64, u8, Event)>,
}

impl Client {
    fn majority(&self) -> usize {
        self.servers / 2 + 1
    }

    fn record(&mut self, now: u64, phase: Phase, kind: OpKind, value: Option<i64>) {
        let stage = if phase == Phase::Respond { 0 } else { 1 };
        self.events.push((now, stage, Event { ts: 0, client: self.index, kind, phase, value }));
    }

    fn send_stage(&mut self, now: u64, out: &mut Outbox<RegisterMsg>) {
        self.last_sent = now;
        let op = self.op;
        match &self.stage {
            Stage::Query { replies } => {
                for s in (0..self.servers).filter(|s| !replies.contains_key(s)) {
                    out.send(s, RegisterMsg::Query { op });
                }
            }
            Stage::Update { acks, tag, value } => {
                for s in (0..self.servers).filter(|s| !acks.contains(s)) {
                    out.send(s, RegisterMsg::Update { op, tag: *tag, value: *value });
                }
            }
            Stage::Local => {
                let write = match self.current {
                    Some(Op::Write(v)) => Some(v),
                    _ => None,
                };
                out.send(self.home, RegisterMsg::Local { op, write });
            }
            Stage::Idle => {}
        }
    }

    fn finish(&mut self, now: u64, value: i64) {
        let op = self.current.take().expect("an operation is open");
        match op {
            Op::Read => self.record(now, Phase::Respond, OpKind::Read, Some(value)),
            Op::Write(v) => self.record(now, Phase::Respond, OpKind::Write, Some(v)),
        }
        self.stage = Stage::Idle;
    }

    fn on_message(&mut self, now: u64, from: usize, msg: RegisterMsg, out: &mut Outbox<RegisterMsg>) {
        let majority = self.majority();
        match (msg, &mut self.stage) {
            (RegisterMsg::QueryReply { op, tag, value }, Stage::Query { replies }) if op == self.op => {
                replies.insert(from, (tag, value));
                if replies.len() >= majority {
                    let (max_tag, max_value) = replies.values().copied().max_by_key(|(t, _)| *t).expect("majority");
                    let (tag, value) = match self.current.expect("open operation") {
                        Op::Write(v) => (Tag { seq: max_tag.seq + 1, writer: self.index }, v),
                        Op::Read => (max_tag, max_value),
                    };
                    self.stage = Stage::Update { acks: BTreeSet::new(), tag, value };
                    self.send_stage(now, out);
                }
            }
            (RegisterMsg::UpdateAck { op }, Stage::Update { acks, value, .. }) if op == self.op => {
                acks.insert(from);
                if acks.len() >= majority {
                    let v = *value;
                    self.finish(now, v);
                }
            }
            (RegisterMsg::LocalReply { op, value }, Stage::Local) if op == self.op => self.finish(now, value),
            _ => {}
        }
    }

    fn on_tick(&mut self, now: u64, out: &mut Outbox<RegisterMsg>) {
        if self.current.is_none() {
            if let Some(&(at, op)) = self.todo.first() {
                if now >= at {
                    self.todo.remove(0);
                    self.current = Some(op);
                    self.op += 1;
                    match op {
                        Op::Read => self.record(now, Phase::Invoke, OpKind::Read, None),
                        Op::Write(v) => self.record(now, Phase::Invoke, OpKind::Write, Some(v)),
                    }
                    self.stage = match self.protocol {
                        Protocol::Quorum => Stage::Query { replies: BTreeMap::new() },
                        Protocol::Local => Stage::Local,
                    };
                    self.send_stage(now, out);
                }
            }
        } else if now >= self.last_sent + self.retry {
            self.send_stage(now, out);
        }
    }

    fn idle(&self) -> bool {
        self.current.is_none() && self.todo.is_empty()
    }
}

#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
enum Node {
    Server(Server),
    Client(Client),
}

impl NetProcess for Node {
    type Msg = RegisterMsg;

    fn on_message(&mut self, now: u64, from: usize, msg: RegisterMsg, out: &mut Outbox<RegisterMsg>) {
        match self {
            Node::Server(s) => s.on_message(from, msg, out),
            Node::Client(c) => c.on_message(now, from, msg, out),
        }
    }

    fn on_tick(&mut self, now: u64, out: &mut Outbox<RegisterMsg>) {
        match self {
            Node::Server(s) => {
                if s.gossip && now.is_multiple_of(2) {
                    s.spread(out);
                }
            }
            Node::Client(c) => c.on_tick(now, out),
        }
    }
}

/// Runs the client script against the chosen register. Servers are nodes
/// `0..servers`; client `c` is node `servers + c`.
pub fn run_register(config: &RegisterConfig) -> Result<RegisterRun, HarnessError> {
    if config.servers == 0 {
        return Err(HarnessError::BadSchedule("at least one server is required".into()));
    }
    if let Some(op) = config.script.iter().find(|op| op.client >= config.clients) {
        return Err(HarnessError::UnknownProcess(config.client_node(op.client)));
    }
    let mut nodes: Vec<Node> = (0..config.servers)
        .map(|id| {
            Node::Server(Server {
                id,
                servers: config.servers,
                tag: Tag::default(),
                value: 0,
                tags: vec![Tag::default()],
                gossip: config.protocol == Protocol::Local,
            })
        })
        .collect();
    for c in 0..config.clients {
        let mut todo: Vec<(u64, Op)> = config.script.iter().filter(|o| o.client == c).map(|o| (o.at, o.op)).collect();
        todo.sort_by_key(|(at, _)| *at);
        nodes.push(Node::Client(Client {
            index: c,
            servers: config.servers,
            home: config.home(c),
            protocol: config.protocol,
            retry: config.retry.max(1),
            todo,
            current: None,
            op: 0,
            stage: Stage::Idle,
            last_sent: 0,
            events: Vec::new(),
        }));
    }
    let run = run_network(nodes, &config.net, |nodes: &[Node], crashed| {
        nodes.iter().zip(crashed).all(|(n, c)| match n {
            Node::Client(cl) => c.is_some() || cl.idle(),
            Node::Server(_) => true,
        })
    })?;

    let mut stamped: Vec<(u64, u8, usize, Event)> = Vec::new();
    let mut replica_tags = Vec::new();
    let mut unavailable = 0;
    for (i, node) in run.processes.iter().enumerate() {
        match node {
            Node::Server(s) => replica_tags.push(s.tags.clone()),
            Node::Client(c) => {
                stamped.extend(c.events.iter().map(|&(step, stage, e)| (step, stage, c.index, e)));
                if c.current.is_some() && run.crashed[i].is_none() {
                    unavailable += 1;
                }
            }
        }
    }
    stamped.sort_by_key(|&(step, stage, client, _)| (step, stage, client));
    let events = stamped
        .into_iter()
        .enumerate()
        .map(|(i, (.., e))| Event { ts: i as u64 + 1, ..e })
        .collect();
    Ok(RegisterRun {
        history: History { events },
        replica_tags,
        unavailable,
        steps: run.steps,
        log: run.log,
    })
}
