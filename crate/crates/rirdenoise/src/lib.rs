//! File formats, reports, the parallel sweep runner and the `rirdenoise`
//! command-line tool built on [`rirdenoise_core`].

pub mod cli;
pub mod config;
mod error;
pub mod manifest;
pub mod report;
pub mod sweep;
pub mod wav;

pub use error::{CliError, ExitStatus};
pub use rirdenoise_core as core;
