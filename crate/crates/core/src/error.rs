use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("evaluation at m = {m} is within {guard:e} of a pole")]
    PoleProximity { m: String, guard: f64 },

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("root scan on ({lo}, {hi}) is inconsistent with the limiting signs; refine the grid")]
    RootScanIncomplete { lo: f64, hi: f64 },

    #[error("regularity margin {margin} is below tau = {tau}")]
    RegularityFailed { margin: f64, tau: f64 },

    #[error("quadrature grid too coarse: doubling nodes changed the value by {change:e}")]
    GridTooCoarse { change: f64 },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),

    #[error("{failed} of {total} trials failed, above the 0.1% allowance; first failure: {first}")]
    TrialFailures { failed: usize, total: usize, first: String },

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// True for failures of a numerical method, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::PoleProximity { .. }
                | Error::NoConvergence { .. }
                | Error::RootScanIncomplete { .. }
                | Error::GridTooCoarse { .. }
                | Error::QuadratureFailure(_)
                | Error::TrialFailures { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
