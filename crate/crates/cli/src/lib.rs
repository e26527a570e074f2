//! Batch harness around `trp-core`: agent playthroughs, population
//! generation for TRP and the Markov baseline, evaluation and rendering.
//!
//! The `trp` binary is a thin clap front end over these functions.

pub mod commands;
pub mod config;
pub mod render;

use std::path::{Path, PathBuf};

use thiserror::Error;
use trp_core::{KitError, MetricsError};

pub use commands::{
    cmd_evaluate, cmd_experiment, cmd_generate, cmd_play, generate_population, Method, Outcome,
};
pub use config::{ConfigFile, Depth, RunConfig, Source};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 1 for usage and config problems, 2 for IO, 3 for internal failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Io { .. } => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl From<KitError> for CliError {
    fn from(e: KitError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        CliError::Config(e.to_string())
    }
}
