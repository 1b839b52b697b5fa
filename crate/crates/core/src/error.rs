use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Failure modes shared by every analytic routine.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A scenario or argument violates a documented precondition.
    InvalidParameter(&'static str),
    /// A value fell outside the domain of the requested quantity.
    OutOfDomain { what: &'static str, value: f64 },
    /// A root search could not establish a sign change.
    NoBracket { what: &'static str, lo: f64, hi: f64 },
    /// An iterative method stopped before reaching its tolerance.
    NoConvergence { what: &'static str, error_estimate: f64 },
    /// A conditional probability has a vanishing denominator.
    Degenerate(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::OutOfDomain { what, value } => write!(f, "{what} out of domain: {value}"),
            Error::NoBracket { what, lo, hi } => {
                write!(f, "{what}: no sign change in [{lo}, {hi}]")
            }
            Error::NoConvergence {
                what,
                error_estimate,
            } => write!(f, "{what} did not converge (error estimate {error_estimate:e})"),
            Error::Degenerate(msg) => write!(f, "degenerate conditioning: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
