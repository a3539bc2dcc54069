use std::path::PathBuf;

use thiserror::Error;

use crate::model::Diagnostic;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("domain error: {0}")]
    Domain(String),
}

fn join(diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("invalid input: {}", join(.0))]
    Invalid(Vec<Diagnostic>),
    #[error("path {path} has travel delay {delay} steps, longer than period '{period}' ({len} steps)")]
    DelayExceedsPeriod { path: String, delay: usize, period: String, len: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("malformed instance: {0}")]
    Dimension(String),
    #[error("instance has integer variables; request relaxation or use the MILP solver")]
    IntegerVariables,
    #[error("instance has {rows} rows, above the reference solver limit of {limit}; export to MPS instead")]
    TooLarge { rows: usize, limit: usize },
}

#[derive(Debug, Error)]
pub enum MpsError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("name map: {0}")]
    NameMap(#[from] serde_json::Error),
}

#[derive(Debug, Error)]
pub enum AuditError {
    #[error("solution has no value for variable {0}")]
    MissingVariable(String),
    #[error("solution status is {0}, audit needs an optimal solution")]
    NotOptimal(String),
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{file}:{line}: {msg}")]
    Schema { file: String, line: usize, msg: String },
    #[error("{file}: {msg}")]
    Length { file: String, msg: String },
    #[error("invalid case: {}", join(.0))]
    Invalid(Vec<Diagnostic>),
    #[error("unknown bundled case '{0}'")]
    UnknownCase(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl IoError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        IoError::Io { path: path.into(), source }
    }
}

/// Union of the library error types.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Mps(#[from] MpsError),
    #[error(transparent)]
    Audit(#[from] AuditError),
    #[error(transparent)]
    Io(#[from] IoError),
}
