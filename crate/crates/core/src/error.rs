use thiserror::Error;

/// Diagnostics attached to a quadrature that ran out of subdivisions.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadDiagnostics {
    pub value: f64,
    pub error_estimate: f64,
    pub tolerance: f64,
    pub intervals: usize,
    pub evaluations: usize,
}

impl std::fmt::Display for QuadDiagnostics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "value {:e}, error estimate {:e} > tolerance {:e} after {} intervals ({} evaluations)",
            self.value, self.error_estimate, self.tolerance, self.intervals, self.evaluations
        )
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(QuadDiagnostics),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("sampling envelope violated: target/envelope ratio {ratio} at r^2 = {r2}")]
    EnvelopeViolation { ratio: f64, r2: f64 },

    #[error("rejection sampling acceptance {acceptance:.3e} is below 1e-3")]
    Efficiency { acceptance: f64 },

    #[error("grid resolution insufficient: {0}")]
    Resolution(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Quadrature(_)
                | Error::Numerical(_)
                | Error::EnvelopeViolation { .. }
                | Error::Efficiency { .. }
                | Error::Resolution(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
