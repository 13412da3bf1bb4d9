use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("config: {0}")]
    Parse(#[from] toml::de::Error),

    #[error("config is missing the [{section}] section required by `{command}`")]
    MissingSection {
        section: &'static str,
        command: &'static str,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("empty sweep: need n >= 1 and from < to (got from = {from}, to = {to}, n = {n})")]
    EmptySweep { from: f64, to: f64, n: usize },

    #[error("`{command}` cannot write {format} output")]
    UnsupportedFormat {
        command: &'static str,
        format: &'static str,
    },

    #[error(transparent)]
    Core(#[from] ambimerton::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("thread pool: {0}")]
    Threads(#[from] rayon::ThreadPoolBuildError),
}

impl CliError {
    /// 1 for bad input, 3 for numerical failures inside a solver.
    pub fn exit_code(&self) -> u8 {
        use ambimerton::Error as E;
        match self {
            CliError::Core(
                E::StabilityViolation { .. }
                | E::ConcavityLoss { .. }
                | E::MonotonicityLoss { .. }
                | E::InvalidCoeffs { .. }
                | E::NonFiniteState { .. }
                | E::ExcessiveAbsorption { .. },
            ) => 3,
            CliError::Write { .. } | CliError::Json(_) | CliError::Csv(_) | CliError::Threads(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
