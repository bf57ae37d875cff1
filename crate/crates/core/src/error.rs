use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("smoothing window too large: n = {n}, m_t = {half_window} leaves no anchor frequency")]
    WindowTooLarge { n: usize, half_window: usize },

    #[error("missing value at row {row}, column {column}")]
    MissingValue { row: usize, column: String },

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("lambda search failed: {0}")]
    SearchFailure(String),

    #[error("scenario failed: {failed} of {runs} runs did not complete")]
    ScenarioFailed { failed: usize, runs: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag for the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::InvalidConfig(_) => "invalid_config",
            Error::WindowTooLarge { .. } => "window_too_large",
            Error::MissingValue { .. } => "missing_value",
            Error::Parse { .. } => "parse",
            Error::NumericalFailure(_) => "numerical_failure",
            Error::SearchFailure(_) => "search_failure",
            Error::ScenarioFailed { .. } => "scenario_failed",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }
}
