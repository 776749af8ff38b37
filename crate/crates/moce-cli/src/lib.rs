//! Command-line companion to the estimation library: CSV ingestion, a
//! Monte Carlo study harness, and deterministic report artifacts.

pub mod config;
pub mod error;
pub mod io;
pub mod report;
pub mod sim;

pub use error::{CliError, Result};
