//! One-round clock synchronization without drift, and the shifting
//! construction that shows its `ε(1 - 1/n)` skew is the best possible.

#[cfg(test)]
mod tests;

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClockError {
    #[error("invalid clock model: {0}")]
    InvalidModel(String),
    #[error("csv: {0}")]
    Csv(String),
}

/// Local clock value at which every process broadcasts.
pub const SEND_AT: f64 = 0.0;

/// Process `p` reads `t + offsets[p]` at real time `t`. `delays[p][q]` is
/// the delay of the single message from `p` to `q`; the diagonal is unused.
#[derive(Clone, Debug, PartialEq)]
pub struct ClockModel {
    pub n: usize,
    pub offsets: Vec<f64>,
    pub delta: f64,
    pub epsilon: f64,
    pub delays: Vec<Vec<f64>>,
}

impl ClockModel {
    /// Every delay at `delta`.
    pub fn uniform(offsets: Vec<f64>, delta: f64, epsilon: f64) -> Self {
        let n = offsets.len();
        ClockModel { n, offsets, delta, epsilon, delays: vec![vec![delta; n]; n] }
    }

    pub fn with_delays(mut self, delays: Vec<Vec<f64>>) -> Self {
        self.delays = delays;
        self
    }

    pub fn validate(&self) -> Result<(), ClockError> {
        let bad = |m: String| Err(ClockError::InvalidModel(m));
        if self.n == 0 || self.offsets.len() != self.n {
            return bad(format!("{} offsets for n={}", self.offsets.len(), self.n));
        }
        if !(self.delta >= 0.0) || !(self.epsilon >= 0.0) {
            return bad(format!("delta={} epsilon={}", self.delta, self.epsilon));
        }
        if self.delays.len() != self.n || self.delays.iter().any(|row| row.len() != self.n) {
            return bad("delay matrix must be n x n".into());
        }
        for p in 0..self.n {
            for q in (0..self.n).filter(|&q| q != p) {
                let d = self.delays[p][q];
                if !(self.delta <= d && d <= self.delta + self.epsilon) {
                    return bad(format!(
                        "delay {p}->{q} = {d} outside [{}, {}]",
                        self.delta,
                        self.delta + self.epsilon
                    ));
                }
            }
        }
        Ok(())
    }

    /// Local clock reading of `to` when the message from `from` arrives.
    fn receive_time(&self, from: usize, to: usize) -> f64 {
        SEND_AT - self.offsets[from] + self.delays[from][to] + self.offsets[to]
    }
}

/// What a process observes: `(sender, timestamp, local receive time)`.
pub type View = Vec<(usize, f64, f64)>;

#[derive(Clone, Debug, PartialEq)]
pub struct SyncOutcome {
    pub adjustments: Vec<f64>,
    /// `offset + adjustment`: the logical clock at real time 0.
    pub logical: Vec<f64>,
    pub skew: f64,
    pub views: Vec<View>,
}

/// The largest skew the averaging rule can produce.
pub fn skew_bound(n: usize, epsilon: f64) -> f64 {
    epsilon * (1.0 - 1.0 / n as f64)
}

/// Each process estimates every sender's clock as `timestamp + δ + ε/2`
/// and moves its logical clock to the mean of its own clock and the
/// estimates.
pub fn sync_run(model: &ClockModel) -> Result<SyncOutcome, ClockError> {
    model.validate()?;
    let n = model.n;
    let views: Vec<View> = (0..n)
        .map(|q| {
            (0..n)
                .filter(|&p| p != q)
                .map(|p| (p, SEND_AT, model.receive_time(p, q)))
                .collect()
        })
        .collect();
    let adjustments: Vec<f64> = views
        .iter()
        .map(|view| {
            let gap: f64 = view
                .iter()
                .map(|&(_, stamp, local)| stamp + model.delta + model.epsilon / 2.0 - local)
                .sum();
            gap / n as f64
        })
        .collect();
    let logical: Vec<f64> = model.offsets.iter().zip(&adjustments).map(|(o, a)| o + a).collect();
    let skew = spread(&logical);
    Ok(SyncOutcome { adjustments, logical, skew, views })
}

fn spread(xs: &[f64]) -> f64 {
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    hi - lo
}

/// Two executions no process can tell apart, one of which forces the
/// bound.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftWitness {
    pub model: ClockModel,
    pub outcome: SyncOutcome,
    /// Process 0 runs ε earlier in real time; delays to and from it are
    /// compensated.
    pub twin: ClockModel,
    pub twin_outcome: SyncOutcome,
}

impl ShiftWitness {
    pub fn skew(&self) -> f64 {
        self.outcome.skew
    }

    /// Exact comparison. Offsets, δ and ε on a dyadic grid keep the
    /// shifted arithmetic exact; arbitrary decimals can differ in the last ulp.
    pub fn views_identical(&self) -> bool {
        self.outcome.views == self.twin_outcome.views
    }
}

/// Messages into process 0 take δ and messages into process `n - 1` (and
/// out of process 0) take δ + ε. Process 0 then runs fast and `n - 1` slow
/// by `ε(1 - 1/n)` in total. The twin moves process 0's clock back by ε,
/// which turns every δ into δ + ε on its links and vice versa, leaving all
/// local observations unchanged.
pub fn shift_witness(model: &ClockModel) -> Result<ShiftWitness, ClockError> {
    let n = model.n;
    if n < 2 {
        return Err(ClockError::InvalidModel("the shifting argument needs n >= 2".into()));
    }
    let (lo, hi) = (model.delta, model.delta + model.epsilon);
    let mut delays = vec![vec![lo; n]; n];
    for p in 0..n {
        for q in (0..n).filter(|&q| q != p) {
            delays[p][q] = if q == 0 {
                lo
            } else if p == 0 || q == n - 1 {
                hi
            } else {
                lo
            };
        }
    }
    let base = model.clone().with_delays(delays.clone());
    let mut twin = base.clone();
    twin.offsets[0] -= model.epsilon;
    for q in 1..n {
        twin.delays[0][q] = delays[0][q] - model.epsilon;
        twin.delays[q][0] = delays[q][0] + model.epsilon;
    }
    let outcome = sync_run(&base)?;
    let twin_outcome = sync_run(&twin)?;
    Ok(ShiftWitness { model: base, outcome, twin, twin_outcome })
}

/// Number of corner assignments: one bit per ordered pair.
pub fn corner_count(n: usize) -> u64 {
    1u64 << (n * (n - 1))
}

/// Corner assignment `id`: bit `k` of `id` puts the `k`-th ordered pair
/// (row-major, diagonal skipped) at δ + ε instead of δ.
pub fn corner_delays(n: usize, delta: f64, epsilon: f64, id: u64) -> Vec<Vec<f64>> {
    let mut delays = vec![vec![delta; n]; n];
    let mut k = 0;
    for (p, row) in delays.iter_mut().enumerate() {
        for (q, d) in row.iter_mut().enumerate() {
            if p != q {
                if id >> k & 1 == 1 {
                    *d = delta + epsilon;
                }
                k += 1;
            }
        }
    }
    delays
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SkewRow {
    pub n: usize,
    pub epsilon: f64,
    #[serde(rename = "assignmentId")]
    pub assignment_id: u64,
    pub skew: f64,
}

/// Skew at every corner of the delay box. Limited to `n <= 4`.
pub fn corner_skews(offsets: &[f64], delta: f64, epsilon: f64) -> Result<Vec<SkewRow>, ClockError> {
    let n = offsets.len();
    if !(2..=4).contains(&n) {
        return Err(ClockError::InvalidModel(format!("corner enumeration supports 2 <= n <= 4, got {n}")));
    }
    (0..corner_count(n))
        .map(|id| {
            let model = ClockModel::uniform(offsets.to_vec(), delta, epsilon)
                .with_delays(corner_delays(n, delta, epsilon, id));
            Ok(SkewRow { n, epsilon, assignment_id: id, skew: sync_run(&model)?.skew })
        })
        .collect()
}

/// Skew over `samples` uniformly drawn delay matrices. Row ids are sample
/// indices.
pub fn sampled_skews(
    offsets: &[f64],
    delta: f64,
    epsilon: f64,
    samples: u64,
    seed: u64,
) -> Result<Vec<SkewRow>, ClockError> {
    let n = offsets.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|id| {
            let delays = (0..n)
                .map(|_| (0..n).map(|_| delta + epsilon * rng.random::<f64>()).collect())
                .collect();
            let model = ClockModel::uniform(offsets.to_vec(), delta, epsilon).with_delays(delays);
            Ok(SkewRow { n, epsilon, assignment_id: id, skew: sync_run(&model)?.skew })
        })
        .collect()
}

pub fn write_skews<W: Write>(rows: &[SkewRow], out: W) -> Result<(), ClockError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| ClockError::Csv(e.to_string()))?;
    }
    w.flush().map_err(|e| ClockError::Csv(e.to_string()))
}
