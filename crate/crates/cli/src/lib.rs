//! Command-line harness for the bouncing-ball simulator: scenario files,
//! batch runs, and CSV/JSON output.

pub mod commands;
pub mod config;
pub mod output;

use bounce_core::BounceError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Model(BounceError),
    #[error("scenario {0}: {1}")]
    Scenario(String, Box<CliError>),
}
