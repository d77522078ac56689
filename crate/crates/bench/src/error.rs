use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes. `2` is left to argument-parsing errors.
pub mod exit_code {
    pub const SUCCESS: i32 = 0;
    pub const CONFIG_INVALID: i32 = 3;
    pub const IO_FAILURE: i32 = 4;
    pub const DIVERGED_STATE: i32 = 5;
    pub const SIMULATION_FAILURE: i32 = 6;
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{field}: {message}")]
    ConfigInvalid { field: String, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Simulation {
        context: String,
        #[source]
        source: mps_core::Error,
    },
}

impl BenchError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        BenchError::ConfigInvalid {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        BenchError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn simulation(context: impl Into<String>, source: mps_core::Error) -> Self {
        BenchError::Simulation {
            context: context.into(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            BenchError::ConfigInvalid { .. } => "config_invalid",
            BenchError::Io { .. } => "io_failure",
            BenchError::Simulation {
                source: mps_core::Error::DivergedState { .. },
                ..
            } => "diverged_state",
            BenchError::Simulation { .. } => "simulation_failure",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "config_invalid" => exit_code::CONFIG_INVALID,
            "io_failure" => exit_code::IO_FAILURE,
            "diverged_state" => exit_code::DIVERGED_STATE,
            _ => exit_code::SIMULATION_FAILURE,
        }
    }

    /// `error kind=<kind> message="<text>"` on a single line.
    pub fn machine_line(&self) -> String {
        let message = self
            .to_string()
            .replace(['\n', '\r'], " ")
            .replace('"', "'");
        format!("error kind={} message=\"{}\"", self.kind(), message)
    }
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;
