use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the library.
///
/// The variants are grouped by how a caller should react: domain and
/// admissibility errors mean the input is outside the mathematical domain of
/// the operation, numeric errors mean an algorithm failed on a valid input,
/// parse errors mean a textual descriptor was malformed.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("not admissible: {0}")]
    Admissibility(#[from] Violation),

    #[error("non-positive profile value {value} at {location}")]
    Positivity { value: f64, location: String },

    #[error("inadmissible node {node}: {violation}")]
    InadmissibleNode { node: usize, violation: Violation },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("parse error in `{field}`: {message}")]
    Parse { field: String, message: String },
}

impl Error {
    pub(crate) fn parse(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by leaving the domain of an operation (as
    /// opposed to algorithmic failure or malformed input).
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::Parameter(_)
                | Error::Dimension { .. }
                | Error::Admissibility(_)
                | Error::Positivity { .. }
                | Error::InadmissibleNode { .. }
        )
    }
}

/// The cone condition a point failed.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum Violation {
    /// `sigma_j(lambda) <= 0` for some `j <= k`.
    #[error("sigma_{j} = {value} is not positive")]
    Sigma { j: usize, value: f64 },
    /// `min lambda_i + delta * sum lambda_i <= 0`.
    #[error("margin min(lambda) + delta*sum(lambda) = {margin} is not positive")]
    SigmaDelta { margin: f64 },
    /// The operator value itself is not positive.
    #[error("operator value {value} is not positive")]
    NonPositive { value: f64 },
    /// A component is not finite.
    #[error("non-finite component at index {index}")]
    NonFinite { index: usize },
}
