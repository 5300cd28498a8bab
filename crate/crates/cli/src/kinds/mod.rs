//! Registry of scenario kinds. Each kind validates its parameters up front
//! and then runs once per seed.

mod clock;
mod consensus;
mod mutex;
mod register;

use distlab::automata::{Automaton, Execution};
use distlab::harness::TraceFile;
use serde::de::DeserializeOwned;
use serde_json::{Map, Value as Json};

use crate::error::CliError;
use crate::scenario::{Scenario, SeedSet};

/// Result of one (scenario, seed) run.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub pass: bool,
    pub metrics: Map<String, Json>,
    /// Traces carry their own verdict; failing ones are always written.
    pub traces: Vec<TraceFile>,
    /// Extra artifacts as (file suffix, contents).
    pub files: Vec<(String, Vec<u8>)>,
}

impl Outcome {
    pub fn verdict(&self) -> &'static str {
        verdict(self.pass)
    }

    pub fn metric(&mut self, key: &str, value: impl Into<Json>) {
        self.metrics.insert(key.to_string(), value.into());
    }
}

pub fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "fail"
    }
}

pub trait Job: Send + Sync {
    /// `None` is the exhaustive run.
    fn run(&self, seed: Option<u64>) -> Result<Outcome, String>;

    /// Automaton that step-level traces of this kind replay against.
    fn automaton(&self) -> Option<Automaton> {
        None
    }

    /// Re-evaluates the predicate named by `label` on a replayed execution.
    /// `true` means the execution violates it.
    fn violates(&self, _label: &str, _exec: &Execution) -> bool {
        false
    }
}

pub struct KindInfo {
    pub name: &'static str,
    pub summary: &'static str,
    pub params: &'static str,
    pub exhaustive: bool,
}

pub const KINDS: [KindInfo; 10] = [
    KindInfo {
        name: "floodmin",
        summary: "FloodMin k-set agreement under crash scripts",
        params: "n, f, k=1, inputs?, allInputs=false, script?",
        exhaustive: true,
    },
    KindInfo {
        name: "dls",
        summary: "DLS consensus under partial synchrony",
        params: "n, f?, inputs?, gst=20, delta=1, mode=chaos|conflict|hold, crashes=[], horizon?",
        exhaustive: false,
    },
    KindInfo {
        name: "approx",
        summary: "approximate agreement with fault-tolerant averaging",
        params: "inputs, f, epsilon, maxRounds=100, mode=sync|async, maxDelay=4, crashes=[], enforceThird=true",
        exhaustive: true,
    },
    KindInfo {
        name: "clocksync",
        summary: "averaging clock synchronization against the skew bound",
        params: "n, epsilon=1, delta=0, offsets?, samples=1000",
        exhaustive: true,
    },
    KindInfo {
        name: "mutex.burns",
        summary: "Burns-Lynch one-bit mutual exclusion, model checked",
        params: "n=2, cap=1000000, properties=[mutualExclusion, deadlockFreedom]",
        exhaustive: true,
    },
    KindInfo {
        name: "mutex.semaphore",
        summary: "test-and-set semaphore mutual exclusion, model checked",
        params: "n=2, cap=1000000, properties=[mutualExclusion, deadlockFreedom]",
        exhaustive: true,
    },
    KindInfo {
        name: "mutex.attack",
        summary: "poised-writer hiding attack on an under-provisioned algorithm",
        params: "system=oneRegister|burns, n=2, targets=[0], states=100000, solo=64",
        exhaustive: true,
    },
    KindInfo {
        name: "quorum",
        summary: "majority-quorum replicated register, linearizability checked",
        params: "servers=3, clients=2, script, crashes=[], maxDelay=3, horizon=400, retry=4",
        exhaustive: false,
    },
    KindInfo {
        name: "cap.cp",
        summary: "quorum register under partition; passes iff consistent",
        params: "partition=canonical|null, script?",
        exhaustive: false,
    },
    KindInfo {
        name: "cap.ap",
        summary: "local-first register under partition; passes iff available",
        params: "partition=canonical|null, script?",
        exhaustive: false,
    },
];

pub fn kind_info(name: &str) -> Option<&'static KindInfo> {
    KINDS.iter().find(|k| k.name == name)
}

/// Validates `scenario` against its kind and builds the runnable job.
pub fn prepare(scenario: &Scenario) -> Result<Box<dyn Job>, CliError> {
    let kind = scenario.kind.as_str();
    let info = kind_info(kind).ok_or_else(|| CliError::UnknownKind(kind.to_string()))?;
    let exhaustive = scenario.seed_set == SeedSet::Exhaustive;
    if exhaustive && !info.exhaustive {
        return Err(CliError::schema(kind, "this kind needs an explicit seed list"));
    }
    let p = &scenario.params;
    let job: Box<dyn Job> = match kind {
        "floodmin" => Box::new(consensus::FloodMinJob::new(params(kind, p)?).map_err(|e| CliError::schema(kind, e))?),
        "dls" => Box::new(consensus::DlsJob::new(params(kind, p)?).map_err(|e| CliError::schema(kind, e))?),
        "approx" => Box::new(consensus::ApproxJob::new(params(kind, p)?).map_err(|e| CliError::schema(kind, e))?),
        "clocksync" => {
            Box::new(clock::ClockJob::new(params(kind, p)?, exhaustive).map_err(|e| CliError::schema(kind, e))?)
        }
        "mutex.burns" | "mutex.semaphore" => {
            Box::new(mutex::MutexJob::new(kind, params(kind, p)?).map_err(|e| CliError::schema(kind, e))?)
        }
        "mutex.attack" => Box::new(mutex::AttackJob::new(params(kind, p)?).map_err(|e| CliError::schema(kind, e))?),
        "quorum" => Box::new(register::QuorumJob::new(params(kind, p)?).map_err(|e| CliError::schema(kind, e))?),
        "cap.cp" | "cap.ap" => {
            Box::new(register::CapJob::new(kind, params(kind, p)?).map_err(|e| CliError::schema(kind, e))?)
        }
        _ => unreachable!("registered kind {kind} has no job"),
    };
    Ok(job)
}

fn params<T: DeserializeOwned>(kind: &str, value: &Json) -> Result<T, CliError> {
    serde_json::from_value(value.clone()).map_err(|e| CliError::schema(kind, format!("params: {e}")))
}

/// Trace seed for the exhaustive run.
pub(crate) fn trace_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::TracePolicy;

    fn scenario(kind: &str, params: Json, seed_set: SeedSet) -> Scenario {
        Scenario { version: 1, kind: kind.into(), params, seed_set, output: None, traces: TracePolicy::Failures }
    }

    #[test]
    fn registry_names_are_unique() {
        let mut names: Vec<_> = KINDS.iter().map(|k| k.name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), KINDS.len());
    }

    #[test]
    fn rejects_unknown_kinds_and_params() {
        let s = scenario("paxos", Json::Null, SeedSet::Exhaustive);
        assert!(matches!(prepare(&s), Err(CliError::UnknownKind(_))));
        let s = scenario("floodmin", serde_json::json!({"n": 3, "f": 1, "rounds": 2}), SeedSet::Exhaustive);
        assert!(matches!(prepare(&s), Err(CliError::SchemaViolation { .. })));
        let s = scenario("floodmin", serde_json::json!({"n": 3, "f": 3}), SeedSet::Exhaustive);
        assert!(matches!(prepare(&s), Err(CliError::SchemaViolation { .. })));
        let s = scenario("quorum", serde_json::json!({"script": []}), SeedSet::Exhaustive);
        assert!(matches!(prepare(&s), Err(CliError::SchemaViolation { .. })));
    }

    #[test]
    fn every_kind_runs_with_minimal_params() {
        let cases = [
            ("floodmin", serde_json::json!({"n": 3, "f": 1})),
            ("dls", serde_json::json!({"n": 3})),
            ("approx", serde_json::json!({"inputs": [0.0, 1.0, 2.0, 3.0], "f": 1, "epsilon": 0.01})),
            ("clocksync", serde_json::json!({"n": 3, "samples": 20})),
            ("mutex.burns", serde_json::json!({})),
            ("mutex.semaphore", serde_json::json!({})),
            ("mutex.attack", serde_json::json!({"system": "burns"})),
            (
                "quorum",
                serde_json::json!({"script": [{"client": 0, "at": 0, "op": {"write": 1}}, {"client": 1, "at": 20, "op": "read"}]}),
            ),
            ("cap.cp", serde_json::json!({})),
            ("cap.ap", serde_json::json!({})),
        ];
        for (kind, p) in cases {
            let job = prepare(&scenario(kind, p, SeedSet::Seeds(vec![3]))).unwrap();
            let out = job.run(Some(3)).unwrap();
            assert!(out.pass, "{kind}: {:?}", out.metrics);
        }
    }
}
