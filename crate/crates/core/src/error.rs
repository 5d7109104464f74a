use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A field or momentum kernel was evaluated at (or numerically on top of) its source.
    #[error("singular evaluation: {0}")]
    Singularity(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid boost: |beta| = {0} must be < 1")]
    InvalidBoost(f64),

    /// The requested truncations cannot deliver a usable answer. `estimate` is the
    /// relative truncation error the quadrature would have carried.
    #[error("quadrature not converged: {detail} (estimated relative error {estimate:e})")]
    NonConvergent { estimate: f64, detail: String },

    #[error("trajectory hit the fluxon exclusion region at t = {t:e} s (separation {separation:e} cm)")]
    TrajectorySingularity { t: f64, separation: f64 },

    #[error("loop edge {edge} passes within {distance:e} cm of singular point {point}")]
    PathSingularity {
        edge: usize,
        point: usize,
        distance: f64,
    },

    #[error("point lies on loop edge {edge}; winding number undefined")]
    AmbiguousWinding { edge: usize },

    #[error("flux sample {index} coincides with the evaluation point")]
    CoincidentSample { index: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
