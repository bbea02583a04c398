use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("node set must not be empty")]
    EmptyNodeSet,

    #[error("bipartition inconsistent with structural balance: {0}")]
    InconsistentBipartition(String),

    #[error("self-confidence level must be positive, got {0}")]
    NonPositiveConfidence(f64),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix dimension {n} exceeds the solver cap {cap}")]
    TooLarge { n: usize, cap: usize },

    #[error("QR iteration did not converge after {sweeps} sweeps ({remaining} eigenvalues left, residual {residual:.3e})")]
    NoConvergence {
        sweeps: usize,
        remaining: usize,
        residual: f64,
    },

    #[error("power iteration did not settle after {iterations} iterations (last estimate {last_estimate})")]
    PowerIteration { iterations: usize, last_estimate: f64 },

    #[error("spectrum inconsistent with a normalized influence matrix: spectral radius {0}")]
    NotNormalized(f64),

    #[error("degenerate ellipse: a = {a}, b = {b}")]
    DegenerateEllipse { a: f64, b: f64 },

    #[error("degenerate moment statistics: {0}")]
    DegenerateMoments(String),

    #[error("formula regime invalid: {0}")]
    FormulaRegime(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("opinion bound violated at step {step} (max |x| = {max_abs})")]
    BoundViolation { step: usize, max_abs: f64 },

    #[error("trajectory stopped before converging")]
    NotConverged,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    /// Errors caused by bad user input rather than numerical failure.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::NonPositiveConfidence(_)
                | Error::InvalidNetwork(_)
                | Error::EmptyNodeSet
                | Error::Json { .. }
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
