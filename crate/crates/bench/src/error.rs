#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid benchmark configuration:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),

    #[error("table error: {0}")]
    Table(String),

    #[error("plot error: {0}")]
    Plot(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Core(#[from] matexpo_core::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;
