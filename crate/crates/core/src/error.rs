use std::path::PathBuf;

use crate::poisson::PoissonSolveStats;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite sample {value} at cell {index} (x = {x})")]
    NonFiniteSample { index: usize, x: f64, value: f64 },

    #[error("non-positive density {value} at cell {cell}")]
    NonPositiveDensity { cell: usize, value: f64 },

    #[error("non-finite value {value} at cell {cell}")]
    NonFinite { cell: usize, value: f64 },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(
        "Newton iteration did not converge after {} iterations (residual {:e}, tolerance {:e})",
        .0.iterations, .0.final_residual, .0.tolerance
    )]
    NonConvergence(PoissonSolveStats),

    #[error("singular Jacobian: zero pivot at row {row}")]
    SingularJacobian { row: usize },

    #[error("invalid soliton parameters: {0}")]
    InvalidSolitonParams(String),

    #[error("ion density singularity reached at node {node} (phi = {phi})")]
    BreakdownReached { node: usize, phi: f64 },

    #[error("profile march exceeded {max_nodes} nodes")]
    MaxNodesExceeded { max_nodes: usize },

    #[error("potential crossed zero at node {node} before reaching the tail tolerance")]
    TruncationMissed { node: usize },

    #[error("domain of length {domain} is shorter than the pulse support {support}")]
    DomainTooShort { domain: f64, support: f64 },

    #[error("reference array has zero max-norm")]
    ZeroReferenceNorm,

    #[error("non-positive amplitude {0}")]
    NonPositiveAmplitude(f64),

    #[error("step failed at t = {t}: {source}")]
    Step {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("config parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn at_time(self, t: f64) -> Error {
        match self {
            e @ Error::Step { .. } => e,
            e => Error::Step { t, source: Box::new(e) },
        }
    }
}
