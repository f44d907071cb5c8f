use std::io;

use thiserror::Error;

/// Errors raised anywhere in the clustering pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty partition")]
    EmptyPartition,

    #[error("dimension mismatch: expected {expected} items, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cannot standardize fewer than 2 rows")]
    TooFewRows,

    #[error("zero distance incompatible with reciprocal similarity")]
    ZeroDistanceReciprocal,

    #[error("item {0} is already allocated")]
    AlreadyAllocated(usize),

    #[error("silhouette undefined for {clusters} clusters over {items} items")]
    SilhouetteUndefined { clusters: usize, items: usize },

    #[error("target cluster count {0} unreachable")]
    UnreachableClusterCount(usize),

    #[error("no grid point produced a defined silhouette:\n{diagnostics}")]
    NoValidGridPoint { diagnostics: String },

    #[error("data error: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// Process exit code for the command-line tool: 3 for data problems and
    /// 4 for numerical or search failures. Usage errors (2) are raised by the
    /// argument parser before any of these can occur.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::EmptyPartition
            | Error::DimensionMismatch { .. }
            | Error::InvalidInput(_)
            | Error::TooFewRows
            | Error::ZeroDistanceReciprocal
            | Error::Data(_)
            | Error::Io(_) => 3,
            Error::InvalidParameter(_) => 2,
            Error::AlreadyAllocated(_)
            | Error::SilhouetteUndefined { .. }
            | Error::UnreachableClusterCount(_)
            | Error::NoValidGridPoint { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
