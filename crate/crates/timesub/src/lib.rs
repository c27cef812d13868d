//! File formats and command-line front end for `timesub-core`.

pub mod cli;
mod error;
pub mod formats;

pub use error::CliError;
