//! Reference fault-tolerant algorithms: FloodMin k-set agreement, DLS
//! consensus under partial synchrony, and approximate agreement.

mod approx;
mod averaging;
mod dls;
mod floodmin;
#[cfg(test)]
mod tests;

pub use approx::{approx_agree, ApproxConfig, ApproxMode, ApproxRun};
pub use averaging::ft_average;
pub use dls::{chaos_config, conflict_config, dls_consensus, dls_horizon, DlsMsg, DlsProcess, DlsRun, Lock};
pub use floodmin::{
    chain_script, flood_min, flood_min_log, flood_min_rounds, for_each_crash_script, random_crash_script, FloodMinProcess, FloodMinRun,
};

use crate::harness::HarnessError;

/// `n` processes, up to `f` faulty, at most `k` distinct decisions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConsensusInstance {
    pub n: usize,
    pub f: usize,
    pub k: usize,
    pub inputs: Vec<i64>,
}

impl ConsensusInstance {
    pub fn new(n: usize, f: usize, k: usize, inputs: Vec<i64>) -> Result<Self, ConsensusError> {
        if n == 0 || f >= n || k == 0 || inputs.len() != n {
            return Err(ConsensusError::InvalidInstance { n, f, k, inputs: inputs.len() });
        }
        Ok(ConsensusInstance { n, f, k, inputs })
    }

    pub fn consensus(n: usize, f: usize, inputs: Vec<i64>) -> Result<Self, ConsensusError> {
        Self::new(n, f, 1, inputs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConsensusError {
    #[error("invalid instance: n={n}, f={f}, k={k}, {inputs} inputs")]
    InvalidInstance { n: usize, f: usize, k: usize, inputs: usize },
    #[error("a majority of correct processes needs f < n/2 (n={n}, f={f})")]
    QuorumUnreachable { n: usize, f: usize },
    #[error("trimming {f} from each end needs more than {} values, got {got}", 2 * f)]
    TooFewValues { got: usize, f: usize },
    #[error("{0}")]
    TooManyFaults(String),
    #[error("no termination within {rounds} rounds")]
    NonTermination { rounds: usize },
    #[error(transparent)]
    Harness(#[from] HarnessError),
}
