use std::path::PathBuf;

use thiserror::Error;

/// Errors reported by mesh construction, solver setup, time integration,
/// and the experiment drivers.
#[derive(Debug, Error)]
pub enum OvdgError {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("Gauss rules are tabulated for 1..=16 points, requested {0}")]
    UnsupportedQuadrature(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The periodic primitive v with v_x = u exists only when u has zero
    /// mean; the auxiliary solve refuses data that violates this.
    #[error("auxiliary solve needs zero-mean data: integral of u is {mean:.3e}")]
    IncompatibleMean { mean: f64 },

    #[error("auxiliary operator is rank deficient ({0})")]
    RankDeficient(String),

    #[error("singular recovery block in cell {cell}")]
    SingularBlock { cell: usize },

    #[error("solution lost finiteness at step {step}, t = {time:.6e}")]
    NonFinite { step: usize, time: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, OvdgError>;

impl OvdgError {
    /// Exit code category for the command line driver: configuration
    /// problems are distinguished from runtime aborts and I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            OvdgError::InvalidMesh(_)
            | OvdgError::UnsupportedQuadrature(_)
            | OvdgError::InvalidConfig(_) => 2,
            OvdgError::IncompatibleMean { .. }
            | OvdgError::RankDeficient(_)
            | OvdgError::SingularBlock { .. }
            | OvdgError::NonFinite { .. } => 3,
            OvdgError::Io { .. } => 4,
        }
    }
}
