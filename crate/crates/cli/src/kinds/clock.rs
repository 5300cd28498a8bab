use distlab::clocksync::{corner_skews, sampled_skews, shift_witness, skew_bound, write_skews, ClockModel};
use distlab::harness::{LogRecord, TraceFile};
use serde::Deserialize;
use serde_json::json;

use super::{trace_seed, Job, Outcome};

/// Slack on both sides of the skew bound.
const TOLERANCE: f64 = 1e-9;

fn unit() -> f64 {
    1.0
}

fn samples() -> u64 {
    1000
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct ClockParams {
    n: usize,
    #[serde(default = "unit")]
    epsilon: f64,
    #[serde(default)]
    delta: f64,
    /// Hardware clock offsets; all zero by default.
    offsets: Option<Vec<f64>>,
    /// Delay matrices drawn per seeded run.
    #[serde(default = "samples")]
    samples: u64,
}

pub struct ClockJob {
    offsets: Vec<f64>,
    delta: f64,
    epsilon: f64,
    samples: u64,
}

impl ClockJob {
    pub fn new(p: ClockParams, exhaustive: bool) -> Result<Self, String> {
        let offsets = p.offsets.unwrap_or_else(|| vec![0.0; p.n]);
        if offsets.len() != p.n {
            return Err(format!("{} offsets for n = {}", offsets.len(), p.n));
        }
        if exhaustive && !(2..=4).contains(&p.n) {
            return Err(format!("corner enumeration supports 2 <= n <= 4, got {}", p.n));
        }
        ClockModel::uniform(offsets.clone(), p.delta, p.epsilon).validate().map_err(|e| e.to_string())?;
        Ok(ClockJob { offsets, delta: p.delta, epsilon: p.epsilon, samples: p.samples })
    }
}

impl Job for ClockJob {
    fn run(&self, seed: Option<u64>) -> Result<Outcome, String> {
        let n = self.offsets.len();
        let rows = match seed {
            None => corner_skews(&self.offsets, self.delta, self.epsilon),
            Some(s) => sampled_skews(&self.offsets, self.delta, self.epsilon, self.samples, s),
        }
        .map_err(|e| e.to_string())?;
        let witness = shift_witness(&ClockModel::uniform(self.offsets.clone(), self.delta, self.epsilon))
            .map_err(|e| e.to_string())?;
        let bound = skew_bound(n, self.epsilon);
        let max = rows.iter().map(|r| r.skew).fold(0.0, f64::max);
        let within = max <= bound + TOLERANCE;
        let attained = witness.skew() >= bound - TOLERANCE;
        let identical = witness.views_identical();

        let mut out = Outcome { pass: within && attained && identical, ..Outcome::default() };
        out.metric("assignments", rows.len());
        out.metric("maxSkew", max);
        out.metric("bound", bound);
        out.metric("witnessSkew", witness.skew());
        out.metric("viewsIdentical", identical);
        let mut csv = Vec::new();
        write_skews(&rows, &mut csv).map_err(|e| e.to_string())?;
        out.files.push(("skews.csv".into(), csv));
        let records = rows
            .iter()
            .map(|r| LogRecord::new(r.assignment_id, "assignment", "skew", json!(r.skew).to_string(), 0.0))
            .chain([LogRecord::new(rows.len() as u64, "witness", "skew", json!(witness.skew()).to_string(), 0.0)])
            .collect();
        out.traces.push(TraceFile::from_records("clocksync", trace_seed(seed), out.verdict(), records).with_label("run"));
        Ok(out)
    }
}
