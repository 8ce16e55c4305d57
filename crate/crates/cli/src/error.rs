use std::path::PathBuf;

use acom::games::GameError;
use acom::harness::HarnessError;
use acom::optim::OptimError;
use acom::spectral::SpectralError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("numerical abort at step {step}: {message}")]
    Numerical { step: u64, message: String },
    #[error("numerical failure: {0}")]
    Linalg(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 for configuration problems, 3 for numerical aborts, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Numerical { .. } | CliError::Linalg(_) => 3,
            CliError::Io { .. } | CliError::Csv(_) => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Maps an optimizer error found while checking `section`.
    pub fn from_optim(e: OptimError, section: &str) -> Self {
        match e {
            OptimError::InvalidConfig { field, reason } => CliError::Config {
                path: format!("{section}.{field}"),
                message: reason,
            },
            OptimError::Game(g) => CliError::from_game(g, "init"),
            other => CliError::Linalg(other.to_string()),
        }
    }

    pub fn from_game(e: GameError, path: &str) -> Self {
        CliError::Config {
            path: path.into(),
            message: e.to_string(),
        }
    }

    pub fn from_spectral(e: SpectralError) -> Self {
        match e {
            SpectralError::UnsupportedRule(_) => CliError::Config {
                path: "optimizer.rule".into(),
                message: e.to_string(),
            },
            SpectralError::NotZeroSum(_)
            | SpectralError::NoDenseBlocks { .. }
            | SpectralError::AsymmetricBlock { .. } => CliError::Config {
                path: "game".into(),
                message: e.to_string(),
            },
            SpectralError::Config(o) => CliError::from_optim(o, "optimizer"),
            SpectralError::Game(g) => CliError::from_game(g, "init"),
            SpectralError::Linalg(l) => CliError::Linalg(l.to_string()),
        }
    }

    /// `section` names the config block the harness options came from.
    pub fn from_harness(e: HarnessError, section: &str) -> Self {
        match e {
            HarnessError::Numerical { step, source } => CliError::Numerical {
                step,
                message: source.to_string(),
            },
            HarnessError::InvalidOptions(message) => CliError::Config {
                path: section.into(),
                message,
            },
            HarnessError::NoEquilibrium(_) => CliError::Config {
                path: "game".into(),
                message: e.to_string(),
            },
            HarnessError::Optim(o) => CliError::from_optim(o, "optimizer"),
            HarnessError::Spectral(s) => CliError::from_spectral(s),
            HarnessError::Game(g) => CliError::from_game(g, "init"),
        }
    }
}
