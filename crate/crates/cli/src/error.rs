use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] haarint::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("matrix file line {line}: {message}")]
    MatrixFile { line: usize, message: String },
}

impl CliError {
    /// 2 for usage errors; 1 for anything that stops a run after it started.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::MatrixFile { .. } => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
