//! CLI error classification: validation problems exit with 2, solver
//! failures with 3.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Bad spec file, bad flags, or an inadmissible request.
    Validation(String),
    /// The requested computation failed numerically.
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Solver(_) => 3,
        }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) | CliError::Solver(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<kelly_core::Error> for CliError {
    fn from(e: kelly_core::Error) -> Self {
        use kelly_core::Error::*;
        match e {
            InvalidParameter { .. } | Domain { .. } | DegenerateDensity { .. }
            | Unsupported { .. } | UnsupportedDimension { .. } | InsufficientData { .. }
            | Inadmissible { .. } => CliError::Validation(e.to_string()),
            NoSolution { .. } | UnboundedFraction | Convergence { .. } | Internal(_) => {
                CliError::Solver(e.to_string())
            }
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
