use std::path::PathBuf;

use memkin_core::KernelError;

use crate::field::ScalarField;
use crate::trajectory::Trajectory;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("kernel evaluation: {0}")]
    Kernel(#[from] KernelError),

    #[error("non-finite sample {value} at node {index} (v = {point:?})")]
    NonFiniteSample { index: usize, point: [f64; 3], value: f64 },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("solver aborted at t = {time}: {reason}")]
    Abort {
        time: f64,
        reason: String,
        /// State at the moment of failure.
        snapshot: Option<Box<ScalarField>>,
        /// Everything recorded before the failure.
        partial: Option<Box<Trajectory>>,
    },

    /// A solver inside a multi-run study failed.
    #[error("study aborted: {0}")]
    Study(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("malformed {what}: {detail}")]
    Format { what: &'static str, detail: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
