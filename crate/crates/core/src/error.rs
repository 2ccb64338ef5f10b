//! Error type shared by all modules.

use alloc::string::String;
use core::fmt;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// Errors produced by model validation, solvers, and samplers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A model parameter or argument violates its constraint.
    InvalidParameter {
        /// Name of the offending parameter or field.
        name: &'static str,
        /// Human-readable description of the violated constraint.
        message: String,
    },
    /// An evaluation point lies outside the function's domain.
    Domain {
        /// Name of the argument.
        name: &'static str,
        /// Offending value.
        value: f64,
    },
    /// The bivariate density is degenerate at |rho| = 1; moments remain analytic.
    DegenerateDensity {
        /// The offending correlation.
        rho: f64,
    },
    /// The operation is not defined for this model or dependence structure.
    Unsupported {
        /// Description of the unsupported combination.
        what: &'static str,
    },
    /// Dimension exceeds what the method can handle.
    UnsupportedDimension {
        /// Requested dimension.
        given: usize,
        /// Largest supported dimension.
        max: usize,
    },
    /// Too few samples to estimate moments.
    InsufficientData {
        /// Minimum number of samples required.
        needed: usize,
        /// Number of samples provided.
        got: usize,
    },
    /// The fraction vector leaves the admissible region of the criterion.
    Inadmissible {
        /// Explanation, including the violated bound.
        message: String,
    },
    /// A singular system whose right-hand side is not in the matrix range.
    NoSolution {
        /// Least-squares residual norm of the best attempt.
        residual: f64,
    },
    /// Degenerate sure-thing moments with nonzero edge: the fraction is unbounded.
    UnboundedFraction,
    /// Iteration failed to reach the requested tolerance.
    Convergence {
        /// Iterations performed before giving up.
        iterations: u32,
        /// Residual norm at the last iterate.
        residual: f64,
    },
    /// An internal invariant was violated; indicates a bug, not bad input.
    Internal(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { name, message } => {
                write!(f, "invalid parameter `{name}`: {message}")
            }
            Error::Domain { name, value } => {
                write!(f, "`{name}` = {value} is outside the domain")
            }
            Error::DegenerateDensity { rho } => {
                write!(f, "bivariate density is degenerate at rho = {rho}")
            }
            Error::Unsupported { what } => write!(f, "unsupported: {what}"),
            Error::UnsupportedDimension { given, max } => {
                write!(f, "dimension {given} exceeds the supported maximum {max}")
            }
            Error::InsufficientData { needed, got } => {
                write!(f, "need at least {needed} samples, got {got}")
            }
            Error::Inadmissible { message } => write!(f, "inadmissible fractions: {message}"),
            Error::NoSolution { residual } => write!(
                f,
                "singular system: right-hand side not in range (residual {residual:.3e})"
            ),
            Error::UnboundedFraction => {
                write!(f, "degenerate moments: Kelly fraction is unbounded")
            }
            Error::Convergence {
                iterations,
                residual,
            } => write!(
                f,
                "no convergence after {iterations} iterations (residual {residual:.3e})"
            ),
            Error::Internal(what) => write!(f, "internal error: {what}"),
        }
    }
}
