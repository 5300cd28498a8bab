use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::error::Category;

use crate::error::CliError;

pub const SCENARIO_VERSION: u32 = 1;

/// One experiment: a registered kind, its parameters and the seeds to run.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct Scenario {
    pub version: u32,
    pub kind: String,
    #[serde(default = "empty_params")]
    pub params: serde_json::Value,
    pub seed_set: SeedSet,
    /// Output directory, used when neither `--out` nor the environment
    /// names one.
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub traces: TracePolicy,
}

fn empty_params() -> serde_json::Value {
    serde_json::Value::Object(Default::default())
}

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(try_from = "RawSeedSet")]
pub enum SeedSet {
    Seeds(Vec<u64>),
    Exhaustive,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawSeedSet {
    Seeds(Vec<u64>),
    Word(String),
}

impl TryFrom<RawSeedSet> for SeedSet {
    type Error = String;

    fn try_from(raw: RawSeedSet) -> Result<Self, Self::Error> {
        match raw {
            RawSeedSet::Seeds(s) if s.is_empty() => Err("seedSet must not be empty".into()),
            RawSeedSet::Seeds(s) => Ok(SeedSet::Seeds(s)),
            RawSeedSet::Word(w) if w == "exhaustive" => Ok(SeedSet::Exhaustive),
            RawSeedSet::Word(w) => Err(format!("seedSet must be a list of seeds or \"exhaustive\", got {w:?}")),
        }
    }
}

impl SeedSet {
    /// `None` stands for the single exhaustive run.
    pub fn runs(&self) -> Vec<Option<u64>> {
        match self {
            SeedSet::Seeds(s) => s.iter().copied().map(Some).collect(),
            SeedSet::Exhaustive => vec![None],
        }
    }
}

/// Which traces a run writes: only those of failed runs, or every one.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TracePolicy {
    #[default]
    Failures,
    All,
}

/// Seed column value and trace-file stem component.
pub struct SeedLabel(pub Option<u64>);

impl fmt::Display for SeedLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(s) => write!(f, "{s}"),
            None => f.write_str("exhaustive"),
        }
    }
}

/// Parses a scenario file holding one scenario object or an array of them.
pub fn parse_scenarios(path: &Path, text: &str) -> Result<Vec<Scenario>, CliError> {
    let parsed = if text.trim_start().starts_with('[') {
        serde_json::from_str::<Vec<Scenario>>(text)
    } else {
        serde_json::from_str::<Scenario>(text).map(|s| vec![s])
    };
    let scenarios = parsed.map_err(|e| {
        // serde_json appends the position to its message; it is reported separately.
        let full = e.to_string();
        let message = full.rsplit_once(" at line ").map_or(full.as_str(), |(m, _)| m).to_string();
        match e.classify() {
            Category::Data => CliError::SchemaViolation {
                kind: "scenario".into(),
                message: format!("{}:{}:{}: {message}", path.display(), e.line(), e.column()),
            },
            _ => CliError::Parse { path: path.to_path_buf(), line: e.line(), column: e.column(), message },
        }
    })?;
    if scenarios.is_empty() {
        return Err(CliError::schema("scenario", "the file contains no scenarios"));
    }
    for s in &scenarios {
        if s.version != SCENARIO_VERSION {
            return Err(CliError::schema(&s.kind, format!("version must be {SCENARIO_VERSION}, got {}", s.version)));
        }
    }
    Ok(scenarios)
}

pub fn load_scenarios(path: &Path) -> Result<Vec<Scenario>, CliError> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    parse_scenarios(path, &text)
}

/// First 16 hex digits of the digest of the canonical parameter JSON.
pub fn params_hash(params: &serde_json::Value) -> String {
    let canonical = serde_json::to_vec(params).expect("json values serialize");
    distlab::value::hex_digest(&canonical)[..16].to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Vec<Scenario>, CliError> {
        parse_scenarios(Path::new("s.json"), text)
    }

    #[test]
    fn parses_single_and_list() {
        let one = parse(r#"{"version":1,"kind":"floodmin","params":{"n":3,"f":0},"seedSet":[1,2]}"#).unwrap();
        assert_eq!(one[0].seed_set, SeedSet::Seeds(vec![1, 2]));
        assert_eq!(one[0].traces, TracePolicy::Failures);
        let two = parse(r#"[{"version":1,"kind":"a","seedSet":"exhaustive"},{"version":1,"kind":"b","seedSet":[0]}]"#)
            .unwrap();
        assert_eq!(two.len(), 2);
        assert_eq!(two[0].seed_set.runs(), vec![None]);
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse("{\n  \"version\": 1,\n  \"kind\": }").unwrap_err();
        let CliError::Parse { line, column, .. } = err else { panic!("{err:?}") };
        assert_eq!((line, column), (3, 11));
    }

    #[test]
    fn unknown_fields_and_bad_seeds_are_rejected() {
        let typo = parse(r#"{"version":1,"kind":"x","seedset":[1]}"#).unwrap_err();
        assert!(matches!(typo, CliError::SchemaViolation { .. }), "{typo:?}");
        let word = parse(r#"{"version":1,"kind":"x","seedSet":"all"}"#).unwrap_err();
        assert!(word.to_string().contains("exhaustive"));
        let version = parse(r#"{"version":2,"kind":"x","seedSet":[1]}"#).unwrap_err();
        assert!(version.to_string().contains("version"));
    }

    #[test]
    fn params_hash_ignores_key_order() {
        let a: serde_json::Value = serde_json::from_str(r#"{"n":3,"f":1}"#).unwrap();
        let b: serde_json::Value = serde_json::from_str(r#"{"f":1,"n":3}"#).unwrap();
        assert_eq!(params_hash(&a), params_hash(&b));
        assert_eq!(params_hash(&a).len(), 16);
    }
}
