use distlab::consistency::{
    cap_config, cap_scenario, lin_check, run_register, CapVariant, ClientOp, History, LinResult, PartitionScenario,
    Protocol, RegisterConfig, MAX_OPS,
};
use distlab::harness::{CrashAt, DelayPolicy, GstModel, NetConfig, TraceFile};
use serde::Deserialize;
use serde_json::json;

use super::{Job, Outcome};

fn three() -> usize {
    3
}

fn two() -> usize {
    2
}

fn three_steps() -> u64 {
    3
}

fn horizon() -> u64 {
    400
}

fn retry() -> u64 {
    4
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct QuorumParams {
    #[serde(default = "three")]
    servers: usize,
    #[serde(default = "two")]
    clients: usize,
    script: Vec<ClientOp>,
    /// Network nodes: servers are `0..servers`, clients follow.
    #[serde(default)]
    crashes: Vec<CrashAt>,
    #[serde(default = "three_steps")]
    max_delay: u64,
    #[serde(default = "horizon")]
    horizon: u64,
    #[serde(default = "retry")]
    retry: u64,
}

fn check_script(script: &[ClientOp], clients: usize) -> Result<(), String> {
    if script.is_empty() {
        return Err("script must contain at least one operation".into());
    }
    if script.len() > MAX_OPS {
        return Err(format!("script has {} operations; the checker limit is {MAX_OPS}", script.len()));
    }
    match script.iter().find(|op| op.client >= clients) {
        Some(op) => Err(format!("no client {}", op.client)),
        None => Ok(()),
    }
}

fn history_csv(h: &History) -> Result<Vec<u8>, String> {
    let mut buf = Vec::new();
    h.write_csv(&mut buf).map_err(|e| e.to_string())?;
    Ok(buf)
}

pub struct QuorumJob {
    p: QuorumParams,
    f: usize,
}

impl QuorumJob {
    pub fn new(p: QuorumParams) -> Result<Self, String> {
        if p.servers == 0 || p.clients == 0 {
            return Err("need at least one server and one client".into());
        }
        if p.max_delay == 0 {
            return Err("maxDelay must be positive".into());
        }
        check_script(&p.script, p.clients)?;
        if let Some(c) = p.crashes.iter().find(|c| c.process >= p.servers + p.clients) {
            return Err(format!("no node {}", c.process));
        }
        Ok(QuorumJob { f: (p.servers - 1) / 2, p })
    }

    fn config(&self, seed: u64) -> RegisterConfig {
        let p = &self.p;
        let net = NetConfig::new(
            GstModel { gst: 0, delta: p.max_delay, f: self.f },
            DelayPolicy::Seeded { seed, max_delay: p.max_delay },
            p.horizon,
        )
        .with_crashes(p.crashes.clone());
        RegisterConfig {
            servers: p.servers,
            clients: p.clients,
            protocol: Protocol::Quorum,
            script: p.script.clone(),
            net,
            retry: p.retry,
            homes: Vec::new(),
        }
    }
}

impl Job for QuorumJob {
    fn run(&self, seed: Option<u64>) -> Result<Outcome, String> {
        let seed = seed.ok_or("quorum needs a seed")?;
        let run = run_register(&self.config(seed)).map_err(|e| e.to_string())?;
        let lin = lin_check(&run.history).map_err(|e| e.to_string())?;
        let crashed_servers = self.p.crashes.iter().filter(|c| c.process < self.p.servers).count();
        // Availability is only owed while a majority of servers survives.
        let owed = crashed_servers <= self.f;
        let pass = lin.is_linearizable() && run.tags_monotone() && (!owed || run.unavailable == 0);
        let mut out = Outcome { pass, ..Outcome::default() };
        out.metric("operations", run.history.operations().len());
        out.metric("pending", run.history.pending());
        out.metric("unavailable", run.unavailable);
        out.metric("linearizable", lin.is_linearizable());
        out.metric("tagsMonotone", run.tags_monotone());
        out.metric("steps", run.steps);
        if let LinResult::Violation(prefix) = &lin {
            out.metric("violationPrefixEvents", prefix.events.len());
        }
        out.files.push(("history.csv".into(), history_csv(&run.history)?));
        out.traces.push(TraceFile::from_records("quorum", seed, out.verdict(), run.log).with_label("run"));
        Ok(out)
    }
}

fn canonical_partition() -> Option<PartitionScenario> {
    Some(PartitionScenario::canonical())
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct CapParams {
    /// `null` runs without a partition.
    #[serde(default = "canonical_partition")]
    partition: Option<PartitionScenario>,
    script: Option<Vec<ClientOp>>,
}

pub struct CapJob {
    kind: &'static str,
    variant: CapVariant,
    p: CapParams,
}

impl CapJob {
    pub fn new(kind: &str, p: CapParams) -> Result<Self, String> {
        let (kind, variant) = match kind {
            "cap.cp" => ("cap.cp", CapVariant::Cp),
            _ => ("cap.ap", CapVariant::Ap),
        };
        if let Some(s) = &p.script {
            check_script(s, 2)?;
        }
        Ok(CapJob { kind, variant, p })
    }
}

impl Job for CapJob {
    fn run(&self, seed: Option<u64>) -> Result<Outcome, String> {
        let seed = seed.ok_or("cap scenarios need a seed")?;
        let mut config = cap_config(self.variant, self.p.partition.as_ref(), seed);
        if let Some(s) = &self.p.script {
            config.script = s.clone();
        }
        let report = cap_scenario(&config, self.variant).map_err(|e| e.to_string())?;
        // Each variant asserts the property it keeps under partition.
        let pass = match self.variant {
            CapVariant::Cp => report.consistent(),
            CapVariant::Ap => report.available(),
        };
        let mut out = Outcome { pass, ..Outcome::default() };
        out.metric("unavailable", report.run.unavailable);
        out.metric("linearizable", report.consistent());
        out.metric("violated", json!(report.violated()));
        out.files.push(("history.csv".into(), history_csv(&report.run.history)?));
        out.traces.push(TraceFile::from_records(self.kind, seed, out.verdict(), report.run.log).with_label("run"));
        Ok(out)
    }
}
