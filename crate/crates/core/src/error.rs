use thiserror::Error;

use crate::behavior::Dims;
use crate::capacity::CapacityCertificate;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    InvalidDims(String),

    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },

    #[error("setting pair (x={x}, y={y}) has zero total signal after background subtraction")]
    ZeroBlock { x: usize, y: usize },

    #[error("invalid behavior: {0}")]
    InvalidBehavior(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("{count} local vertices exceed the enumeration limit of {limit}")]
    TooLarge { count: u128, limit: u128 },

    #[error("linear program failed: {0}")]
    LpFailure(String),

    #[error("quadratic program failed: {0}")]
    QpFailure(String),

    #[error("input is signaling (deficit {deficit:.3e}); project onto the non-signaling polytope first")]
    SignalingInput { deficit: f64 },

    #[error("constraint set V is empty for this behavior")]
    InfeasibleV,

    #[error("Blahut-Arimoto did not converge after {iterations} iterations (lower {lower}, upper {upper})")]
    ChannelNonConvergence {
        iterations: usize,
        lower: f64,
        upper: f64,
    },

    #[error("non-local capacity did not converge: value {} with gap {}", .certificate.value, .certificate.gap)]
    CapacityNonConvergence { certificate: Box<CapacityCertificate> },

    #[error("parse error at {context}: {message}")]
    Parse { context: String, message: String },

    #[error("schema violation: {0}")]
    Schema(String),

    #[error("{failed} of {total} bootstrap resamples failed (first error: {first})")]
    Bootstrap {
        failed: usize,
        total: usize,
        first: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn shape(expected: Dims, found: Dims) -> Self {
        Error::ShapeMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Schema(_) => 2,
            Error::ChannelNonConvergence { .. }
            | Error::CapacityNonConvergence { .. }
            | Error::LpFailure(_)
            | Error::QpFailure(_) => 3,
            Error::Io(_) => 1,
            _ => 4,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(Error::Schema("x".into()).exit_code(), 2);
        assert_eq!(Error::Parse { context: "c".into(), message: "m".into() }.exit_code(), 2);
        let nc = Error::ChannelNonConvergence { iterations: 1, lower: 0.0, upper: 1.0 };
        assert_eq!(nc.exit_code(), 3);
        assert_eq!(Error::LpFailure("x".into()).exit_code(), 3);
        assert_eq!(Error::SignalingInput { deficit: 0.1 }.exit_code(), 4);
        assert_eq!(Error::InvalidParameter("x".into()).exit_code(), 4);
    }
}
