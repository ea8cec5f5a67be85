//! Command-line harness around [`dph_core`]: file formats, configuration,
//! result rows and resumable sweeps. The `dph` binary is a thin wrapper over
//! [`cli::run`].

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod harness;
pub mod io;

pub use error::{CliError, Result};
