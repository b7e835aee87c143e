use thiserror::Error;

/// Errors raised by the numerical pipelines.
///
/// Variants split into input errors (bad parameters, out-of-range energies)
/// and numerical failures (non-convergence, bracketing, tracking). The CLI maps
/// the two groups onto different exit codes via [`Error::is_input_error`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter point: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("energy {h} lies outside the interval ({lo}, {hi})")]
    EnergyOutOfRange { h: f64, lo: f64, hi: f64 },

    #[error("root finder did not converge (max residual {max_residual:.3e})")]
    RootFinding { max_residual: f64 },

    #[error("bracketing failed: {0}")]
    Bracketing(String),

    #[error("quadrature did not reach tolerance {tolerance:.1e} (estimate {estimate:.3e}, {nodes} nodes)")]
    Quadrature {
        tolerance: f64,
        estimate: f64,
        nodes: usize,
    },

    #[error("contour separation impossible: third root within {gap:.3e} of the branch cut")]
    ContourSeparation { gap: f64 },

    #[error("branch tracking failed: {0}")]
    BranchTracking(String),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("series order {order} exceeds the supported maximum {max}")]
    SeriesOrder { order: usize, max: usize },
}

impl Error {
    /// True for errors caused by the caller's input rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_) | Error::InvalidInput(_) | Error::EnergyOutOfRange { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
