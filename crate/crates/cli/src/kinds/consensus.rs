use distlab::consensus::{
    approx_agree, chaos_config, conflict_config, dls_consensus, dls_horizon, flood_min, flood_min_log, flood_min_rounds,
    for_each_crash_script, random_crash_script, ApproxConfig, ApproxMode, ConsensusError, ConsensusInstance,
};
use distlab::harness::{
    AdversaryScript, CrashAt, CrashEvent, DelayPolicy, GstModel, LogRecord, NetConfig, TraceFile,
};
use serde::Deserialize;
use serde_json::json;

use super::{trace_seed, verdict, Job, Outcome};

fn one() -> usize {
    1
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct FloodMinParams {
    n: usize,
    f: usize,
    #[serde(default = "one")]
    k: usize,
    /// Defaults to `0..n`.
    inputs: Option<Vec<i64>>,
    /// Run every binary input vector instead of `inputs`.
    #[serde(default)]
    all_inputs: bool,
    /// Fixed crash script; otherwise seeded or enumerated.
    script: Option<AdversaryScript>,
}

pub struct FloodMinJob {
    instances: Vec<ConsensusInstance>,
    rounds: usize,
    script: Option<AdversaryScript>,
}

impl FloodMinJob {
    pub fn new(p: FloodMinParams) -> Result<Self, String> {
        let vectors: Vec<Vec<i64>> = if p.all_inputs {
            if p.n > 16 {
                return Err("allInputs supports n <= 16".into());
            }
            (0..1u32 << p.n).map(|m| (0..p.n).map(|i| i64::from(m >> i & 1)).collect()).collect()
        } else {
            vec![p.inputs.unwrap_or_else(|| (0..p.n as i64).collect())]
        };
        let instances = vectors
            .into_iter()
            .map(|v| ConsensusInstance::new(p.n, p.f, p.k, v))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        if let Some(s) = &p.script {
            let faulty = s.faulty();
            if faulty.len() > p.f {
                return Err(format!("script crashes {} processes but f is {}", faulty.len(), p.f));
            }
        }
        Ok(FloodMinJob { instances, rounds: flood_min_rounds(p.f, p.k), script: p.script })
    }

    /// `Ok(None)` when the run satisfies k-agreement, validity and the
    /// round count; otherwise a description of what failed.
    fn judge(&self, inst: &ConsensusInstance, script: &AdversaryScript) -> Result<Option<String>, String> {
        let run = flood_min(inst, script).map_err(|e| e.to_string())?;
        let distinct = run.distinct_decisions().len();
        Ok(if distinct > inst.k {
            Some(format!("{distinct} distinct decisions"))
        } else if !run.valid(&inst.inputs) {
            Some("invalid decision".into())
        } else if run.rounds != self.rounds {
            Some(format!("ran {} rounds", run.rounds))
        } else {
            None
        })
    }

    fn trace(
        &self,
        inst: &ConsensusInstance,
        script: &AdversaryScript,
        seed: Option<u64>,
        pass: bool,
    ) -> Result<TraceFile, String> {
        let records = flood_min_log(inst, script).map_err(|e| e.to_string())?;
        Ok(TraceFile::from_records("floodmin", trace_seed(seed), verdict(pass), records).with_label("run"))
    }
}

impl Job for FloodMinJob {
    fn run(&self, seed: Option<u64>) -> Result<Outcome, String> {
        let mut out = Outcome::default();
        let mut scripts = 0u64;
        let mut violations = 0u64;
        let mut first: Option<(usize, AdversaryScript, String)> = None;
        for (i, inst) in self.instances.iter().enumerate() {
            let mut check = |script: AdversaryScript| -> Result<(), String> {
                scripts += 1;
                if let Some(why) = self.judge(inst, &script)? {
                    violations += 1;
                    first.get_or_insert((i, script, why));
                }
                Ok(())
            };
            match (seed, &self.script) {
                (_, Some(s)) => check(s.clone())?,
                (Some(seed), None) => check(random_crash_script(inst.n, inst.f, self.rounds, seed))?,
                (None, None) => {
                    let mut result = Ok(());
                    for_each_crash_script(inst.n, inst.f, self.rounds, |events| {
                        if result.is_ok() {
                            result = check(AdversaryScript::crashes(events.iter().cloned()));
                        }
                    });
                    result?;
                }
            }
        }
        out.pass = violations == 0;
        out.metric("rounds", self.rounds);
        out.metric("scripts", scripts);
        out.metric("inputVectors", self.instances.len());
        out.metric("violations", violations);
        match first {
            Some((i, script, why)) => {
                out.metric("firstViolation", why);
                out.traces.push(self.trace(&self.instances[i], &script, seed, false)?);
            }
            // A single seeded run is small enough to log whether or not it
            // failed; the exhaustive sweep only logs failures.
            None if seed.is_some() && self.instances.len() == 1 => {
                let inst = &self.instances[0];
                let script = self
                    .script
                    .clone()
                    .unwrap_or_else(|| random_crash_script(inst.n, inst.f, self.rounds, seed.unwrap_or_default()));
                let run = flood_min(inst, &script).map_err(|e| e.to_string())?;
                out.metric("decisions", json!(run.decisions));
                out.traces.push(self.trace(inst, &script, seed, true)?);
            }
            None => {}
        }
        Ok(out)
    }
}

fn dls_gst() -> u64 {
    20
}

#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DlsMode {
    /// Seeded pre-GST delays and crashes.
    #[default]
    Chaos,
    /// Per-attempt split delivery that provokes competing locks.
    Conflict,
    /// Every pre-GST message is held to the stabilization deadline.
    Hold,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct DlsParams {
    n: usize,
    /// Defaults to the largest `f` with `2f < n`.
    f: Option<usize>,
    /// Defaults to alternating 0 and 1.
    inputs: Option<Vec<i64>>,
    #[serde(default = "dls_gst")]
    gst: u64,
    #[serde(default = "one_u64")]
    delta: u64,
    #[serde(default)]
    mode: DlsMode,
    /// Extra crashes for `hold` mode.
    #[serde(default)]
    crashes: Vec<CrashAt>,
    horizon: Option<u64>,
}

fn one_u64() -> u64 {
    1
}

pub struct DlsJob {
    inst: ConsensusInstance,
    gst: u64,
    delta: u64,
    mode: DlsMode,
    crashes: Vec<CrashAt>,
    horizon: u64,
}

impl DlsJob {
    pub fn new(p: DlsParams) -> Result<Self, String> {
        let f = p.f.unwrap_or(p.n.saturating_sub(1) / 2);
        let inputs = p.inputs.unwrap_or_else(|| (0..p.n as i64).map(|i| i % 2).collect());
        let inst = ConsensusInstance::consensus(p.n, f, inputs).map_err(|e| e.to_string())?;
        if 2 * f >= p.n {
            return Err(ConsensusError::QuorumUnreachable { n: p.n, f }.to_string());
        }
        if p.delta == 0 {
            return Err("delta must be positive".into());
        }
        if let Some(c) = p.crashes.iter().find(|c| c.process >= p.n) {
            return Err(format!("no process {}", c.process));
        }
        if p.crashes.len() > f {
            return Err(format!("{} crashes exceed f = {f}", p.crashes.len()));
        }
        let horizon = p.horizon.unwrap_or_else(|| dls_horizon(p.n, f, p.gst, p.delta));
        Ok(DlsJob { inst, gst: p.gst, delta: p.delta, mode: p.mode, crashes: p.crashes, horizon })
    }

    fn config(&self, seed: u64) -> NetConfig {
        let (n, f) = (self.inst.n, self.inst.f);
        let mut config = match self.mode {
            DlsMode::Chaos => chaos_config(n, f, seed, self.gst, self.delta),
            DlsMode::Conflict => conflict_config(n, f, seed, self.gst, self.delta),
            DlsMode::Hold => NetConfig::new(
                GstModel { gst: self.gst, delta: self.delta, f },
                DelayPolicy::HoldUntilGst,
                self.horizon,
            )
            .with_crashes(self.crashes.clone()),
        };
        config.horizon = self.horizon;
        config
    }
}

impl Job for DlsJob {
    fn run(&self, seed: Option<u64>) -> Result<Outcome, String> {
        let seed = seed.ok_or("dls needs a seed")?;
        let run = dls_consensus(&self.inst, &self.config(seed)).map_err(|e| e.to_string())?;
        let mut out = Outcome::default();
        let agreement = run.agreement();
        let valid = run.valid(&self.inst.inputs);
        let live = run.all_live_decided();
        let coherent = run.locks_coherent();
        out.pass = agreement && valid && live && coherent;
        out.metric("agreement", agreement);
        out.metric("validity", valid);
        out.metric("allLiveDecided", live);
        out.metric("locksCoherent", coherent);
        out.metric("decisions", json!(run.decisions));
        out.metric("lastDecidedAttempt", json!(run.last_decided_attempt()));
        out.metric("lastDecisionStep", json!(run.decided_at.iter().flatten().max()));
        out.metric("horizon", self.horizon);
        out.metric("steps", run.steps);
        out.traces.push(TraceFile::from_records("dls", seed, out.verdict(), run.log).with_label("run"));
        Ok(out)
    }
}

fn max_rounds() -> usize {
    100
}

fn four() -> u64 {
    4
}

fn yes() -> bool {
    true
}

#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ApproxKind {
    #[default]
    Sync,
    Async,
}

/// A crash of `process` in round `at` (sync) or at step `at` (async).
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApproxCrash {
    process: usize,
    at: u64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct ApproxParams {
    inputs: Vec<f64>,
    f: usize,
    epsilon: f64,
    #[serde(default = "max_rounds")]
    max_rounds: usize,
    #[serde(default)]
    mode: ApproxKind,
    #[serde(default = "four")]
    max_delay: u64,
    #[serde(default)]
    crashes: Vec<ApproxCrash>,
    #[serde(default = "yes")]
    enforce_third: bool,
}

pub struct ApproxJob {
    p: ApproxParams,
}

impl ApproxJob {
    pub fn new(p: ApproxParams) -> Result<Self, String> {
        let n = p.inputs.len();
        if !(p.epsilon > 0.0) {
            return Err("epsilon must be positive".into());
        }
        if n <= 2 * p.f {
            return Err(ConsensusError::TooFewValues { got: n, f: p.f }.to_string());
        }
        if let ApproxKind::Async = p.mode {
            if p.enforce_third && 3 * p.f >= n {
                return Err(format!("asynchronous mode needs 3f < n, got n = {n}, f = {}", p.f));
            }
        }
        if p.crashes.len() > p.f {
            return Err(format!("{} crashes exceed f = {}", p.crashes.len(), p.f));
        }
        if let Some(c) = p.crashes.iter().find(|c| c.process >= n) {
            return Err(format!("no process {}", c.process));
        }
        Ok(ApproxJob { p })
    }

    fn config(&self, seed: u64) -> ApproxConfig {
        let p = &self.p;
        let mode = match p.mode {
            ApproxKind::Sync => ApproxMode::Sync {
                script: AdversaryScript::crashes(
                    p.crashes.iter().map(|c| CrashEvent::new(c.process, c.at as usize, [])),
                ),
            },
            ApproxKind::Async => ApproxMode::Async {
                seed,
                max_delay: p.max_delay,
                crashes: p.crashes.iter().map(|c| CrashAt { process: c.process, step: c.at }).collect(),
            },
        };
        ApproxConfig { epsilon: p.epsilon, max_rounds: p.max_rounds, mode, enforce_third: p.enforce_third }
    }
}

impl Job for ApproxJob {
    fn run(&self, seed: Option<u64>) -> Result<Outcome, String> {
        let mut out = Outcome::default();
        let run = match approx_agree(&self.p.inputs, self.p.f, &self.config(seed.unwrap_or(0))) {
            Ok(run) => run,
            Err(e @ ConsensusError::NonTermination { .. }) => {
                out.pass = false;
                out.metric("terminated", false);
                out.metric("error", e.to_string());
                return Ok(out);
            }
            Err(e) => return Err(e.to_string()),
        };
        let spread = run.output_spread();
        let valid = run.valid(&self.p.inputs);
        let monotone = run.diameters_nonincreasing();
        out.pass = spread <= self.p.epsilon && valid && monotone;
        out.metric("terminated", true);
        out.metric("rounds", run.rounds);
        out.metric("outputSpread", spread);
        out.metric("validity", valid);
        out.metric("diametersNonincreasing", monotone);
        out.metric("diameters", json!(run.diameters));
        out.metric("contraction", json!(run.contraction));
        let records = run
            .diameters
            .iter()
            .enumerate()
            .map(|(r, d)| LogRecord::new(r as u64, "nonfaulty", "diameter", json!(d).to_string(), r as f64))
            .chain(run.outputs.iter().enumerate().filter_map(|(p, o)| {
                o.map(|v| LogRecord::new(run.rounds as u64, p.to_string(), "output", json!(v).to_string(), run.rounds as f64))
            }))
            .collect();
        out.traces.push(TraceFile::from_records("approx", trace_seed(seed), out.verdict(), records).with_label("run"));
        Ok(out)
    }
}
