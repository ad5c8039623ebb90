use std::path::PathBuf;

use causal_bounds::Error;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: parse error at line {line}, column {column}: {msg}")]
    Parse { path: PathBuf, line: usize, column: usize, msg: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0} sample(s) failed; rows are kept with their status")]
    FailedSamples(usize),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn parse(path: &std::path::Path, e: serde_json::Error) -> Self {
        CliError::Parse { path: path.to_path_buf(), line: e.line(), column: e.column(), msg: e.to_string() }
    }

    /// 2 input, 3 criterion, 4 solver, 5 scale.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::Criterion(_)) => 3,
            CliError::Core(Error::Infeasible(_) | Error::Nonconvergence | Error::EmptyIntersection { .. }) => 4,
            CliError::FailedSamples(_) => 4,
            CliError::Core(Error::Scale { .. }) => 5,
            _ => 2,
        }
    }
}
