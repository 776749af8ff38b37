//! Process-level error classification.
//!
//! Every failure is either an input problem (bad flags, malformed files,
//! invalid configuration) reported with exit code 2, or a numerical failure
//! inside the estimation pipeline reported with exit code 3.

use std::fmt;

/// Errors surfaced by the command line tool.
#[derive(Debug)]
pub enum CliError {
    /// Usage, file, or configuration problem; exit code 2.
    Input(String),
    /// Numerical failure in the estimation pipeline; exit code 3.
    Numerical(String),
}

impl CliError {
    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<moce::Error> for CliError {
    fn from(e: moce::Error) -> Self {
        match e {
            moce::Error::Invalid(_) | moce::Error::Dimension(_) | moce::Error::Degenerate(_) => {
                CliError::Input(e.to_string())
            }
            moce::Error::Numerical(_)
            | moce::Error::Kkt(_)
            | moce::Error::NotSpd(_)
            | moce::Error::SingularGroupCov { .. }
            | moce::Error::Internal(_) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
