use std::path::PathBuf;

use thiserror::Error;

use crate::config::ConfigErrors;

/// Failure categories of a command, each with its own exit code.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid configuration:\n{0}")]
    Config(#[from] ConfigErrors),
    #[error(transparent)]
    Core(#[from] rhd_core::Error),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl LabError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// `2` configuration or parameter, `3` step-size (CFL), `4` solver,
    /// domain or structural, `5` fixed-point iteration, `6` file access.
    pub fn exit_code(&self) -> i32 {
        use rhd_core::Error as E;
        match self {
            Self::Config(_) => 2,
            Self::Core(E::Parameter(_) | E::Config(_)) => 2,
            Self::Core(E::StepSize { .. }) => 3,
            Self::Core(E::Solver { .. } | E::Domain { .. } | E::Structural(_)) => 4,
            Self::Core(E::Iteration { .. }) => 5,
            Self::Io { .. } => 6,
        }
    }

    pub fn category(&self) -> &'static str {
        match self.exit_code() {
            2 => "config",
            3 => "cfl",
            4 => "solver",
            5 => "iteration",
            _ => "io",
        }
    }
}
