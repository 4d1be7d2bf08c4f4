//! Library side of the `twodsd` command-line tool: argument definitions,
//! ingestion, command execution and output rendering.

pub mod args;
pub mod commands;
pub mod error;
pub mod ingest;
pub mod output;

pub use args::Cli;
pub use error::{CliError, CliResult};
