use std::fmt::Write as _;

use super::log::{execution_log, read_log, write_log, LogRecord};
use crate::automata::{Action, Automaton, Execution};
use crate::checker::ENV_ACTOR;
use crate::value::{hex_digest, Value};

pub const TRACE_MAGIC: &str = "# distlab-trace";
pub const TRACE_VERSION: &str = "v1";
pub const LASSO_MARKER: &str = "#lasso-start";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TraceError {
    #[error("trace version {found} is not supported (expected {TRACE_VERSION})")]
    VersionMismatch { found: String },
    #[error("trace line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("replay diverged at step {step}: {reason}")]
    Diverged { step: usize, reason: String },
}

/// A counterexample or run log. Automaton traces carry a start state and
/// replay step by step; simulation traces replay by re-running the
/// scenario and comparing records.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceFile {
    pub kind: String,
    pub seed: u64,
    pub verdict: String,
    /// Free-form qualifier, such as the property a counterexample refutes.
    pub label: Option<String>,
    /// Final-state digest for automaton traces, record digest otherwise.
    pub digest: String,
    pub start: Option<Value>,
    /// Index of the first record on the repeated cycle.
    pub lasso_start: Option<usize>,
    pub records: Vec<LogRecord>,
}

/// Hex digest over the CSV rendering of `records`.
pub fn records_digest(records: &[LogRecord]) -> String {
    let mut buf = Vec::new();
    write_log(records, &mut buf).expect("writing to memory");
    hex_digest(&buf)
}

impl TraceFile {
    pub fn from_execution(
        automaton: &Automaton,
        exec: &Execution,
        kind: impl Into<String>,
        seed: u64,
        verdict: impl Into<String>,
    ) -> Self {
        TraceFile {
            kind: kind.into(),
            seed,
            verdict: verdict.into(),
            label: None,
            digest: exec.last_state().digest(),
            start: Some(exec.start.clone()),
            lasso_start: exec.lasso_start,
            records: execution_log(automaton, exec),
        }
    }

    pub fn from_records(kind: impl Into<String>, seed: u64, verdict: impl Into<String>, records: Vec<LogRecord>) -> Self {
        TraceFile {
            kind: kind.into(),
            seed,
            verdict: verdict.into(),
            label: None,
            digest: records_digest(&records),
            start: None,
            lasso_start: None,
            records,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{TRACE_MAGIC} {TRACE_VERSION}");
        let _ = writeln!(out, "# kind: {}", self.kind);
        let _ = writeln!(out, "# seed: {}", self.seed);
        let _ = writeln!(out, "# verdict: {}", self.verdict);
        if let Some(l) = &self.label {
            let _ = writeln!(out, "# label: {l}");
        }
        let _ = writeln!(out, "# digest: {}", self.digest);
        if let Some(s) = &self.start {
            let _ = writeln!(out, "# start: {}", s.canonical());
        }
        let mut csv = Vec::new();
        write_log(&self.records, &mut csv).expect("writing to memory");
        let csv = String::from_utf8(csv).expect("csv output is utf-8");
        // Header plus one line per record; payloads are single-line JSON.
        for (i, line) in csv.lines().enumerate() {
            if self.lasso_start.is_some_and(|l| i == l + 1) {
                out.push_str(LASSO_MARKER);
                out.push('\n');
            }
            out.push_str(line);
            out.push('\n');
        }
        if self.lasso_start == Some(self.records.len()) {
            out.push_str(LASSO_MARKER);
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, TraceError> {
        let mut lines = text.lines().enumerate();
        let parse_err = |line: usize, message: String| TraceError::Parse { line: line + 1, message };
        let (_, first) = lines.next().ok_or_else(|| parse_err(0, "empty trace".into()))?;
        let version = first
            .strip_prefix(TRACE_MAGIC)
            .map(str::trim)
            .ok_or_else(|| parse_err(0, "missing trace header".into()))?;
        if version != TRACE_VERSION {
            return Err(TraceError::VersionMismatch { found: version.to_string() });
        }
        let mut trace = TraceFile {
            kind: String::new(),
            seed: 0,
            verdict: String::new(),
            label: None,
            digest: String::new(),
            start: None,
            lasso_start: None,
            records: Vec::new(),
        };
        let mut csv = String::new();
        let mut data_lines = 0usize;
        for (i, line) in lines {
            if line == LASSO_MARKER {
                trace.lasso_start = Some(data_lines.saturating_sub(1));
                continue;
            }
            if let Some(field) = line.strip_prefix("# ") {
                let (key, value) = field.split_once(": ").ok_or_else(|| parse_err(i, format!("bad header {line:?}")))?;
                match key {
                    "kind" => trace.kind = value.to_string(),
                    "seed" => trace.seed = value.parse().map_err(|e| parse_err(i, format!("seed: {e}")))?,
                    "verdict" => trace.verdict = value.to_string(),
                    "label" => trace.label = Some(value.to_string()),
                    "digest" => trace.digest = value.to_string(),
                    "start" => {
                        trace.start = Some(Value::parse(value).map_err(|e| parse_err(i, format!("start: {e}")))?)
                    }
                    _ => return Err(parse_err(i, format!("unknown header {key:?}"))),
                }
                continue;
            }
            csv.push_str(line);
            csv.push('\n');
            data_lines += 1;
        }
        trace.records = read_log(csv.as_bytes()).map_err(|e| TraceError::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        Ok(trace)
    }

    /// Re-executes the recorded actions from the recorded start state and
    /// checks the final-state digest.
    pub fn replay(&self, automaton: &Automaton) -> Result<Execution, TraceError> {
        let start = self.start.clone().ok_or(TraceError::Diverged {
            step: 0,
            reason: "trace has no start state".into(),
        })?;
        if !automaton.start_states().contains(&start) {
            return Err(TraceError::Diverged { step: 0, reason: "unknown start state".into() });
        }
        let mut exec = Execution::empty(start);
        for (i, r) in self.records.iter().enumerate() {
            let payload = Value::parse(&r.payload).map_err(|e| TraceError::Diverged {
                step: i + 1,
                reason: format!("payload: {e}"),
            })?;
            let action = Action::new(r.action.clone(), payload);
            let actor = automaton.task_of(&action.name).unwrap_or(ENV_ACTOR);
            if r.actor != actor {
                return Err(TraceError::Diverged {
                    step: i + 1,
                    reason: format!("{} is owned by {actor}, not {}", r.action, r.actor),
                });
            }
            let next = automaton
                .step(exec.last_state(), &action)
                .map_err(|e| TraceError::Diverged { step: i + 1, reason: e.to_string() })?;
            exec.push(action, next);
        }
        exec.lasso_start = self.lasso_start;
        if let Some(l) = self.lasso_start {
            let cycle_entry = exec.states().nth(l).cloned();
            if cycle_entry.as_ref() != Some(exec.last_state()) {
                return Err(TraceError::Diverged { step: exec.len(), reason: "lasso does not close".into() });
            }
        }
        if exec.last_state().digest() != self.digest {
            return Err(TraceError::Diverged { step: exec.len(), reason: "final state digest differs".into() });
        }
        Ok(exec)
    }

    /// Compares freshly produced records with the recorded ones.
    pub fn check_records(&self, fresh: &[LogRecord]) -> Result<(), TraceError> {
        for (i, (a, b)) in self.records.iter().zip(fresh).enumerate() {
            if a != b {
                return Err(TraceError::Diverged { step: i + 1, reason: format!("recorded {a:?}, replayed {b:?}") });
            }
        }
        if self.records.len() != fresh.len() {
            return Err(TraceError::Diverged {
                step: self.records.len().min(fresh.len()) + 1,
                reason: format!("recorded {} records, replayed {}", self.records.len(), fresh.len()),
            });
        }
        Ok(())
    }
}
