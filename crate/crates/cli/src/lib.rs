//! Command-line front end: run configuration, subcommand pipelines and
//! artifact writers.

pub mod cli;
pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;

pub use config::{CommandKind, KChoice, RunConfig};
pub use error::CliError;
pub use pipeline::{run, run_with_env, RunOutput};
