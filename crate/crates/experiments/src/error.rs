use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("sampling exhausted at n = {n}, sample {sample}: {attempts} attempts ({detail})")]
    SamplingExhausted {
        n: usize,
        sample: usize,
        attempts: u64,
        detail: String,
    },
    #[error(transparent)]
    Core(#[from] bearing_rigidity::Error),
}

impl From<std::io::Error> for ExperimentError {
    fn from(e: std::io::Error) -> Self {
        ExperimentError::Io(e.to_string())
    }
}

impl From<csv::Error> for ExperimentError {
    fn from(e: csv::Error) -> Self {
        ExperimentError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, ExperimentError>;
