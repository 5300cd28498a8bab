use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::CliError;

/// Column order of `results.csv`.
pub const RESULTS_HEADER: [&str; 5] = ["kind", "params_hash", "seed", "verdict", "metrics"];

/// One row of `results.csv`. `metrics` is a compact JSON object with
/// sorted keys.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct ResultRow {
    pub kind: String,
    pub params_hash: String,
    /// A seed, or `exhaustive`.
    pub seed: String,
    /// `pass`, `fail` or `error`.
    pub verdict: String,
    pub metrics: String,
}

/// Writes through a temporary file in the same directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(CliError::io(dir))?;
    tmp.write_all(contents).map_err(CliError::io(path))?;
    tmp.persist(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e.error })?;
    Ok(())
}

pub fn render_results(rows: &[ResultRow]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record(RESULTS_HEADER).expect("writing to memory");
    }
    for row in rows {
        w.serialize(row).expect("writing to memory");
    }
    w.into_inner().expect("flushing to memory")
}

pub fn read_results(bytes: &[u8]) -> csv::Result<Vec<ResultRow>> {
    csv::Reader::from_reader(bytes).deserialize().collect()
}
