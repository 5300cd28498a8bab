use std::path::{Path, PathBuf};

use distlab::harness::{TraceError, TraceFile};
use rayon::prelude::*;
use serde_json::Value as Json;

use crate::error::CliError;
use crate::kinds::{prepare, verdict, Job, Outcome};
use crate::output::{render_results, write_atomic, ResultRow};
use crate::scenario::{load_scenarios, params_hash, Scenario, SeedLabel, SeedSet, TracePolicy};

pub const DEFAULT_OUT: &str = "distlab-out";

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Worker threads; rayon's default when `None`.
    pub jobs: Option<usize>,
    /// Overrides every scenario's `output`.
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub rows: Vec<ResultRow>,
    pub traces: Vec<PathBuf>,
}

impl RunReport {
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.verdict == "pass")
    }

    pub fn exit_code(&self) -> u8 {
        if self.all_passed() {
            0
        } else {
            1
        }
    }
}

struct Prepared<'a> {
    scenario: &'a Scenario,
    job: Box<dyn Job>,
    hash: String,
}

pub fn run_file(path: &Path, opts: &RunOptions) -> Result<RunReport, CliError> {
    run_scenarios(&load_scenarios(path)?, opts)
}

/// Validates every scenario, then runs all (scenario, seed) pairs on a
/// worker pool. Rows come back in scenario and seed order.
pub fn run_scenarios(scenarios: &[Scenario], opts: &RunOptions) -> Result<RunReport, CliError> {
    let prepared = scenarios
        .iter()
        .map(|s| Ok(Prepared { scenario: s, job: prepare(s)?, hash: params_hash(&s.params) }))
        .collect::<Result<Vec<_>, CliError>>()?;
    let out_dir = opts
        .out
        .clone()
        .or_else(|| scenarios.iter().find_map(|s| s.output.clone()))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let tasks: Vec<(&Prepared, Option<u64>)> =
        prepared.iter().flat_map(|p| p.scenario.seed_set.runs().into_iter().map(move |seed| (p, seed))).collect();

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.jobs {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build().map_err(|e| CliError::Pool(e.to_string()))?;
    let results: Vec<Result<(ResultRow, Vec<PathBuf>), CliError>> =
        pool.install(|| tasks.par_iter().map(|&(p, seed)| run_one(p, seed, &out_dir)).collect());

    let mut rows = Vec::with_capacity(results.len());
    let mut traces = Vec::new();
    for r in results {
        let (row, written) = r?;
        rows.push(row);
        traces.extend(written);
    }
    write_atomic(&out_dir.join("results.csv"), &render_results(&rows))?;
    Ok(RunReport { out_dir, rows, traces })
}

fn stem(kind: &str, hash: &str, seed: Option<u64>) -> String {
    format!("{kind}-{hash}-{}", SeedLabel(seed))
}

fn file_safe(label: &str) -> String {
    label.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' }).collect()
}

fn run_one(p: &Prepared, seed: Option<u64>, out_dir: &Path) -> Result<(ResultRow, Vec<PathBuf>), CliError> {
    let kind = p.scenario.kind.as_str();
    let stem = stem(kind, &p.hash, seed);
    let (verdict, metrics, written) = match p.job.run(seed) {
        Ok(outcome) => {
            let written = write_artifacts(&outcome, &stem, out_dir, p.scenario.traces)?;
            (outcome.verdict().to_string(), Json::Object(outcome.metrics), written)
        }
        Err(message) => ("error".to_string(), serde_json::json!({ "error": message }), Vec::new()),
    };
    let row = ResultRow {
        kind: kind.to_string(),
        params_hash: p.hash.clone(),
        seed: SeedLabel(seed).to_string(),
        verdict,
        metrics: metrics.to_string(),
    };
    Ok((row, written))
}

fn write_artifacts(outcome: &Outcome, stem: &str, out_dir: &Path, policy: TracePolicy) -> Result<Vec<PathBuf>, CliError> {
    for (suffix, contents) in &outcome.files {
        write_atomic(&out_dir.join(format!("{stem}-{suffix}")), contents)?;
    }
    let mut written = Vec::new();
    for t in &outcome.traces {
        if t.verdict == "pass" && policy == TracePolicy::Failures {
            continue;
        }
        let name = match &t.label {
            Some(l) => format!("{stem}-{}.trace", file_safe(l)),
            None => format!("{stem}.trace"),
        };
        let path = out_dir.join("traces").join(name);
        write_atomic(&path, t.render().as_bytes())?;
        written.push(path);
    }
    Ok(written)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplayReport {
    pub kind: String,
    pub verdict: String,
    pub records: usize,
}

/// Re-executes `trace` under the scenario it came from and checks that it
/// reproduces record for record with the same verdict.
pub fn replay_file(trace_path: &Path, scenario_path: &Path) -> Result<ReplayReport, CliError> {
    let text = std::fs::read_to_string(trace_path).map_err(CliError::io(trace_path))?;
    let trace = TraceFile::parse(&text)?;
    let scenarios = load_scenarios(scenario_path)?;
    replay(&trace, &scenarios)
}

pub fn replay(trace: &TraceFile, scenarios: &[Scenario]) -> Result<ReplayReport, CliError> {
    let candidates: Vec<&Scenario> = scenarios.iter().filter(|s| s.kind == trace.kind).collect();
    let mut first_err = None;
    for s in candidates {
        match replay_against(trace, s) {
            Ok(r) => return Ok(r),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    Err(first_err.unwrap_or(CliError::KindMismatch { trace: trace.kind.clone() }))
}

fn replay_against(trace: &TraceFile, scenario: &Scenario) -> Result<ReplayReport, CliError> {
    let job = prepare(scenario)?;
    let label = trace.label.clone().unwrap_or_default();
    if trace.start.is_some() {
        let automaton = job.automaton().ok_or_else(|| TraceError::Diverged {
            step: 0,
            reason: format!("{} traces carry no start state", trace.kind),
        })?;
        let exec = trace.replay(&automaton)?;
        let replayed = if job.violates(&label, &exec) { "fail" } else { "pass" };
        if replayed != trace.verdict {
            return Err(CliError::VerdictMismatch { recorded: trace.verdict.clone(), replayed: replayed.into() });
        }
    }
    let seed = match scenario.seed_set {
        SeedSet::Exhaustive => None,
        SeedSet::Seeds(_) => Some(trace.seed),
    };
    let outcome = job.run(seed).map_err(|reason| TraceError::Diverged { step: 0, reason })?;
    let fresh = outcome.traces.iter().find(|t| t.label == trace.label).ok_or_else(|| TraceError::Diverged {
        step: 0,
        reason: format!("re-run produced no {label:?} trace"),
    })?;
    trace.check_records(&fresh.records)?;
    if fresh.digest != trace.digest {
        return Err(TraceError::Diverged { step: fresh.records.len(), reason: "digest differs".into() }.into());
    }
    if fresh.verdict != trace.verdict {
        return Err(CliError::VerdictMismatch { recorded: trace.verdict.clone(), replayed: fresh.verdict.clone() });
    }
    Ok(ReplayReport { kind: trace.kind.clone(), verdict: verdict(fresh.verdict == "pass").into(), records: trace.records.len() })
}
