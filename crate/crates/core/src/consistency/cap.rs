use serde::{Deserialize, Serialize};

use super::history::History;
use super::lincheck::{lin_check, LinError, LinResult};
use super::register::{run_register, ClientOp, Op, Protocol, RegisterConfig, RegisterRun};
use crate::harness::{DelayPolicy, GstModel, HarnessError, NetConfig, Partition};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CapVariant {
    /// Quorum register: stays consistent, gives up availability.
    Cp,
    /// Local-first register: stays available, gives up consistency.
    Ap,
}

impl CapVariant {
    pub fn protocol(self) -> Protocol {
        match self {
            CapVariant::Cp => Protocol::Quorum,
            CapVariant::Ap => Protocol::Local,
        }
    }
}

/// Cross-group messages among `groups` (network nodes) are dropped during
/// `[from, until)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionScenario {
    pub groups: Vec<Vec<usize>>,
    pub from: u64,
    pub until: u64,
}

impl PartitionScenario {
    /// Three servers and two clients: servers 0, 1 and client 0 (node 3)
    /// against server 2 and client 1 (node 4), for the whole run.
    pub fn canonical() -> Self {
        PartitionScenario { groups: vec![vec![0, 1, 3], vec![2, 4]], from: 0, until: u64::MAX }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CapError {
    #[error("need at least 3 servers, got {0}")]
    TooFewServers(usize),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Lin(#[from] LinError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CapReport {
    pub variant: CapVariant,
    pub run: RegisterRun,
    /// Check of the completed operations.
    pub lin: LinResult,
}

impl CapReport {
    pub fn available(&self) -> bool {
        self.run.unavailable == 0
    }

    pub fn consistent(&self) -> bool {
        self.lin.is_linearizable()
    }

    /// `"availability"`, `"consistency"`, or `None` if neither failed.
    pub fn violated(&self) -> Option<&'static str> {
        match (self.available(), self.consistent()) {
            (true, true) => None,
            (false, _) => Some("availability"),
            (true, false) => Some("consistency"),
        }
    }
}

/// Client 0 writes 1 early; client 1 reads well after that write would
/// have completed without a partition.
pub fn canonical_script() -> Vec<ClientOp> {
    vec![
        ClientOp { client: 0, at: 1, op: Op::Write(1) },
        ClientOp { client: 1, at: 30, op: Op::Read },
    ]
}

pub fn cap_config(variant: CapVariant, partition: Option<&PartitionScenario>, seed: u64) -> RegisterConfig {
    let mut net = NetConfig::new(GstModel { gst: 0, delta: 3, f: 1 }, DelayPolicy::Seeded { seed, max_delay: 3 }, 80);
    if let Some(p) = partition {
        net = net.with_partition(Partition { groups: p.groups.clone(), from: p.from, until: p.until });
    }
    RegisterConfig {
        servers: 3,
        clients: 2,
        protocol: variant.protocol(),
        script: canonical_script(),
        net,
        retry: 4,
        homes: vec![0, 2],
    }
}

pub fn cap_scenario(config: &RegisterConfig, variant: CapVariant) -> Result<CapReport, CapError> {
    if config.servers < 3 {
        return Err(CapError::TooFewServers(config.servers));
    }
    let run = run_register(config)?;
    let completed: History = run.history.completed();
    let lin = lin_check(&completed)?;
    Ok(CapReport { variant, run, lin })
}
