use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Read,
    Write,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Invoke,
    Respond,
}

/// A write carries its argument on both events; a read carries its result
/// on the response only.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Event {
    pub ts: u64,
    pub client: usize,
    pub kind: OpKind,
    pub phase: Phase,
    pub value: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HistoryError {
    #[error("timestamp {ts} does not increase")]
    Timestamp { ts: u64 },
    #[error("client {client} at ts {ts}: {reason}")]
    Alternation { client: usize, ts: u64, reason: &'static str },
    #[error("event at ts {ts} lacks a value")]
    MissingValue { ts: u64 },
    #[error("csv: {0}")]
    Csv(String),
}

/// One operation, paired from its invocation and response.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Operation {
    pub client: usize,
    pub kind: OpKind,
    /// Argument of a write, result of a completed read.
    pub value: Option<i64>,
    pub invoke: u64,
    pub respond: Option<u64>,
}

impl Operation {
    /// Real-time order: `self` responded before `other` was invoked.
    pub fn precedes(&self, other: &Operation) -> bool {
        self.respond.is_some_and(|r| r < other.invoke)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct History {
    pub events: Vec<Event>,
}

impl History {
    pub fn new(events: Vec<Event>) -> Result<Self, HistoryError> {
        let h = History { events };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<(), HistoryError> {
        let mut open: Vec<Option<OpKind>> = Vec::new();
        let mut last = None;
        for e in &self.events {
            if last.is_some_and(|t| e.ts <= t) {
                return Err(HistoryError::Timestamp { ts: e.ts });
            }
            last = Some(e.ts);
            if open.len() <= e.client {
                open.resize(e.client + 1, None);
            }
            let alt = |reason| HistoryError::Alternation { client: e.client, ts: e.ts, reason };
            match (e.phase, open[e.client]) {
                (Phase::Invoke, None) => open[e.client] = Some(e.kind),
                (Phase::Invoke, Some(_)) => return Err(alt("invoked while another operation is open")),
                (Phase::Respond, Some(k)) if k == e.kind => open[e.client] = None,
                (Phase::Respond, _) => return Err(alt("response without a matching invocation")),
            }
            let needs_value = e.kind == OpKind::Write || e.phase == Phase::Respond;
            if needs_value && e.value.is_none() {
                return Err(HistoryError::MissingValue { ts: e.ts });
            }
        }
        Ok(())
    }

    /// Operations in invocation order.
    pub fn operations(&self) -> Vec<Operation> {
        let mut ops: Vec<Operation> = Vec::new();
        let mut open: Vec<Option<usize>> = Vec::new();
        for e in &self.events {
            if open.len() <= e.client {
                open.resize(e.client + 1, None);
            }
            match e.phase {
                Phase::Invoke => {
                    open[e.client] = Some(ops.len());
                    ops.push(Operation { client: e.client, kind: e.kind, value: e.value, invoke: e.ts, respond: None });
                }
                Phase::Respond => {
                    if let Some(i) = open[e.client].take() {
                        ops[i].respond = Some(e.ts);
                        ops[i].value = e.value;
                    }
                }
            }
        }
        ops
    }

    pub fn prefix(&self, len: usize) -> History {
        History { events: self.events[..len.min(self.events.len())].to_vec() }
    }

    /// Drops invocations that never responded.
    pub fn completed(&self) -> History {
        let ops = self.operations();
        let pending: Vec<u64> = ops.iter().filter(|o| o.respond.is_none()).map(|o| o.invoke).collect();
        History { events: self.events.iter().filter(|e| !pending.contains(&e.ts)).copied().collect() }
    }

    pub fn pending(&self) -> usize {
        self.operations().iter().filter(|o| o.respond.is_none()).count()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), HistoryError> {
        let mut w = csv::Writer::from_writer(out);
        for e in &self.events {
            w.serialize(e).map_err(|e| HistoryError::Csv(e.to_string()))?;
        }
        w.flush().map_err(|e| HistoryError::Csv(e.to_string()))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self, HistoryError> {
        let events = csv::Reader::from_reader(input)
            .deserialize()
            .collect::<Result<Vec<Event>, _>>()
            .map_err(|e| HistoryError::Csv(e.to_string()))?;
        History::new(events)
    }
}

/// Builds histories by hand; timestamps count up from 1.
#[derive(Clone, Debug, Default)]
pub struct HistoryBuilder {
    events: Vec<Event>,
}

impl HistoryBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(mut self, client: usize, kind: OpKind, phase: Phase, value: Option<i64>) -> Self {
        let ts = self.events.len() as u64 + 1;
        self.events.push(Event { ts, client, kind, phase, value });
        self
    }

    pub fn invoke_write(self, client: usize, v: i64) -> Self {
        self.push(client, OpKind::Write, Phase::Invoke, Some(v))
    }

    pub fn ack_write(self, client: usize, v: i64) -> Self {
        self.push(client, OpKind::Write, Phase::Respond, Some(v))
    }

    pub fn invoke_read(self, client: usize) -> Self {
        self.push(client, OpKind::Read, Phase::Invoke, None)
    }

    pub fn return_read(self, client: usize, v: i64) -> Self {
        self.push(client, OpKind::Read, Phase::Respond, Some(v))
    }

    pub fn write(self, client: usize, v: i64) -> Self {
        self.invoke_write(client, v).ack_write(client, v)
    }

    pub fn read(self, client: usize, v: i64) -> Self {
        self.invoke_read(client).return_read(client, v)
    }

    pub fn build(self) -> Result<History, HistoryError> {
        History::new(self.events)
    }
}
