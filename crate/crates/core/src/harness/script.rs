use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::HarnessError;

pub const SCRIPT_VERSION: &str = "v1";

/// A crash during `round`: the process sends its round messages only to
/// `deliver_to`, then stops for good.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrashEvent {
    pub process: usize,
    pub round: usize,
    #[serde(default)]
    pub deliver_to: BTreeSet<usize>,
}

/// A forged message from a Byzantine process. `message: null` suppresses
/// the message entirely.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Forgery {
    pub process: usize,
    pub round: usize,
    pub to: usize,
    pub message: serde_json::Value,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversaryScript {
    pub version: String,
    #[serde(default)]
    pub crashes: Vec<CrashEvent>,
    #[serde(default)]
    pub byzantine: Vec<Forgery>,
}

impl AdversaryScript {
    pub fn none() -> Self {
        AdversaryScript {
            version: SCRIPT_VERSION.into(),
            ..Default::default()
        }
    }

    pub fn crashes(events: impl IntoIterator<Item = CrashEvent>) -> Self {
        AdversaryScript {
            crashes: events.into_iter().collect(),
            ..Self::none()
        }
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let script: AdversaryScript =
            serde_json::from_str(text).map_err(|e| HarnessError::BadScript(e.to_string()))?;
        if script.version != SCRIPT_VERSION {
            return Err(HarnessError::BadScript(format!(
                "unsupported script version {:?}",
                script.version
            )));
        }
        Ok(script)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("script serializes")
    }

    /// Every process the script makes deviate.
    pub fn faulty(&self) -> BTreeSet<usize> {
        self.crashes
            .iter()
            .map(|c| c.process)
            .chain(self.byzantine.iter().map(|b| b.process))
            .collect()
    }

    pub fn crash_of(&self, p: usize) -> Option<&CrashEvent> {
        self.crashes.iter().filter(|c| c.process == p).min_by_key(|c| c.round)
    }
}

impl CrashEvent {
    pub fn new(process: usize, round: usize, deliver_to: impl IntoIterator<Item = usize>) -> Self {
        CrashEvent {
            process,
            round,
            deliver_to: deliver_to.into_iter().collect(),
        }
    }
}
