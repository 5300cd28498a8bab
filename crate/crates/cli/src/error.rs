use std::path::PathBuf;

use distlab::harness::TraceError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}:{line}:{column}: {message}")]
    Parse { path: PathBuf, line: usize, column: usize, message: String },
    #[error("unknown scenario kind {0:?}; `distlab list` shows the registered kinds")]
    UnknownKind(String),
    #[error("{kind}: {message}")]
    SchemaViolation { kind: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Trace(#[from] TraceError),
    #[error("trace is of kind {trace:?} but the scenario file has no such scenario")]
    KindMismatch { trace: String },
    #[error("replayed verdict {replayed:?} differs from recorded {recorded:?}")]
    VerdictMismatch { recorded: String, replayed: String },
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    pub fn schema(kind: &str, message: impl ToString) -> CliError {
        CliError::SchemaViolation { kind: kind.to_string(), message: message.to_string() }
    }

    /// 1 when a replay stops reproducing its trace, 2 for everything the
    /// user has to fix in their input.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Trace(TraceError::Diverged { .. }) | CliError::VerdictMismatch { .. } => 1,
            _ => 2,
        }
    }
}
