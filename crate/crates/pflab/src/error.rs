//! Error types shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration (bad keys, missing sections, grid too small).
    #[error("configuration error: {0}")]
    Config(String),

    /// A physical parameter is outside its valid range.
    #[error("domain error: {0}")]
    Domain(String),

    /// A requested basis would exceed the configured memory budget.
    #[error("capacity exceeded: dimension {dimension} over budget {budget}")]
    Capacity { dimension: u128, budget: u128 },

    /// Photon bath operations on an empty mode list.
    #[error("empty photon bath")]
    EmptyBath,

    /// Zero or negative photon frequencies are excluded (infrared cutoff).
    #[error("infrared cutoff violated: mode frequency {omega} must be > 0")]
    InfraredCutoff { omega: f64 },

    /// Eigensolver failed to reach the requested residual.
    #[error("solver did not converge: best residual {residual:.3e} after {iterations} matvecs")]
    SolverStalled { residual: f64, iterations: usize },

    /// Mean-field self-consistency loop failed to converge.
    #[error("mean-field iteration did not converge; residual history {history:?}")]
    MeanFieldDiverged { history: Vec<f64> },

    /// Densities on incompatible grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// An operation was called on an operator it does not apply to.
    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 1 config, 2 solver, 3 capacity.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Capacity { .. } => 3,
            Error::SolverStalled { .. } | Error::MeanFieldDiverged { .. } => 2,
            _ => 1,
        }
    }
}
