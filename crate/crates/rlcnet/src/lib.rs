//! File formats, configuration and experiment orchestration on top of
//! `rlcnet-core`.

pub mod config;
pub mod output;
pub mod run;

pub use config::{Experiment, ExperimentConfig};
pub use run::{run, RunReport};

/// Failure of a CLI run, mapped to an exit code.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(rlcnet_core::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<rlcnet_core::Error> for RunError {
    fn from(e: rlcnet_core::Error) -> Self {
        match e {
            rlcnet_core::Error::InvalidArgument { .. } | rlcnet_core::Error::NotInterior { .. } => {
                RunError::Config(e.to_string())
            }
            other => RunError::Solver(other),
        }
    }
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Solver(_) => 3,
            RunError::Io(_) => 1,
        }
    }
}
