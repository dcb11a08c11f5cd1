use std::path::PathBuf;

use stickslip::hybridsim::SimError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("refusing to simulate: {0}")]
    NonGas(String),
    #[error("engine abort (run {run}): {source}")]
    Engine {
        run: usize,
        #[source]
        source: SimError,
    },
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// Process exit status: 2 config, 3 non-GAS refused, 4 engine abort, 1 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::NonGas(_) => 3,
            CliError::Engine { .. } => 4,
            CliError::Io { .. } => 1,
        }
    }

    pub fn from_sim(run: usize, err: SimError) -> Self {
        match err {
            SimError::NonGas { .. } => CliError::NonGas(format!("{err}; pass --allow-non-gas to override")),
            SimError::InvalidConfig(msg) => CliError::Config(msg),
            other => CliError::Engine { run, source: other },
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}
