//! File formats, run configuration and the command implementations behind
//! the `bellbound` binary.

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod run;
pub mod sweep;

pub use config::RunConfig;
pub use error::CliError;
