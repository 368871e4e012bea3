use thiserror::Error;

/// Errors raised by the estimators and the procedures built on them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The kernel window carries no usable mass, or the local slope is undefined.
    #[error("degenerate weights: {0}")]
    DegenerateWeights(&'static str),

    /// Local linear weights cancelled to (almost) zero total mass.
    #[error(
        "near-singular normalization: |sum of weights| = {sum:e} against absolute mass {mass:e}"
    )]
    NearSingularNormalization { sum: f64, mass: f64 },

    /// The monotone construction found no positive mass on the grid.
    #[error("degenerate grid: {0}")]
    DegenerateGrid(&'static str),

    #[error("probability {u} lies beyond the grid range (cdf at last grid point is {last})")]
    OutOfGridRange { u: f64, last: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("every candidate bandwidth was infeasible")]
    AllCandidatesInfeasible,

    #[error("fit at design point {index} failed: {source}")]
    DesignPoint { index: usize, source: Box<Error> },

    #[error("bootstrap replicate {replicate} failed: {source}")]
    Replicate {
        replicate: usize,
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Short machine-readable name of the variant, used in CLI diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DegenerateWeights(_) => "DegenerateWeights",
            Error::NearSingularNormalization { .. } => "NearSingularNormalization",
            Error::DegenerateGrid(_) => "DegenerateGrid",
            Error::OutOfGridRange { .. } => "OutOfGridRange",
            Error::InvalidInput(_) => "InvalidInput",
            Error::AllCandidatesInfeasible => "AllCandidatesInfeasible",
            Error::DesignPoint { source, .. } | Error::Replicate { source, .. } => source.kind(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
