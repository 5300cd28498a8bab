use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::automata::{Automaton, Execution};
use crate::checker::ENV_ACTOR;

/// One line of an execution log: `step,actor,action,payload,virtualTime`.
/// `payload` holds canonical JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub step: u64,
    pub actor: String,
    pub action: String,
    pub payload: String,
    #[serde(rename = "virtualTime")]
    pub virtual_time: f64,
}

impl LogRecord {
    pub fn new(
        step: u64,
        actor: impl Into<String>,
        action: impl Into<String>,
        payload: impl Into<String>,
        virtual_time: f64,
    ) -> Self {
        LogRecord {
            step,
            actor: actor.into(),
            action: action.into(),
            payload: payload.into(),
            virtual_time,
        }
    }
}

pub const LOG_HEADER: [&str; 5] = ["step", "actor", "action", "payload", "virtualTime"];

/// Log of an automaton execution; virtual time is the step index.
pub fn execution_log(automaton: &Automaton, exec: &Execution) -> Vec<LogRecord> {
    exec.steps
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let actor = automaton.task_of(&s.action.name).unwrap_or(ENV_ACTOR);
            LogRecord::new(
                i as u64 + 1,
                actor,
                s.action.name.clone(),
                s.action.payload.canonical(),
                (i + 1) as f64,
            )
        })
        .collect()
}

pub fn write_log<W: Write>(records: &[LogRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_log<R: Read>(input: R) -> csv::Result<Vec<LogRecord>> {
    csv::Reader::from_reader(input).deserialize().collect()
}
