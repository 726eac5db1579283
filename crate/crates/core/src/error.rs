use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no convergence after {iterations} iterations ({what}); last residual {residual:e}")]
    Convergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("ground-state mode stuck at the window boundary |m| = {max_mode} for kappa = {kappa}")]
    ModeRange { kappa: f64, max_mode: i64 },

    #[error("derivative undefined at kappa = {kappa} ({reason})")]
    UndefinedDerivative { kappa: f64, reason: &'static str },

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("inconsistent result: {0}")]
    Inconsistency(String),

    #[error("sweep point {index} (kappa = {kappa}) failed: {source}")]
    SweepPoint {
        index: usize,
        kappa: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Convergence { .. }
            | Error::ModeRange { .. }
            | Error::Inconclusive(_)
            | Error::Inconsistency(_) => true,
            Error::SweepPoint { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
