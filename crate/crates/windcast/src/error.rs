//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A required CSV column is absent from the header row.
    #[error("schema error: missing column `{0}`")]
    MissingColumn(String),

    /// Parsing produced zero valid rows.
    #[error("empty data: no valid rows in `{0}`")]
    EmptyData(String),

    /// A feature has z_max == z_min and cannot be normalized.
    #[error("degenerate feature `{0}`: z_max == z_min")]
    DegenerateFeature(String),

    /// Series too short for the requested windowing.
    #[error("insufficient data: need at least {needed} contiguous records, longest run is {available}")]
    InsufficientData { needed: usize, available: usize },

    /// Fewer distinct points than requested clusters.
    #[error("infeasible k: {distinct} distinct points < k = {k}")]
    InfeasibleK { k: usize, distinct: usize },

    /// The autoencoder filter tried to remove more than half a cluster.
    #[error("degenerate filter: cluster {cluster} would lose {removed} of {size} rows (> 50%)")]
    DegenerateFilter {
        cluster: usize,
        removed: usize,
        size: usize,
    },

    /// Vector or matrix shapes do not line up.
    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: &'static str,
    },

    /// A computation produced NaN or infinity.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Training loss became non-finite.
    #[error("training diverged at epoch {epoch}")]
    DivergedTraining { epoch: usize },

    /// An argument is outside its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Checkpoint format version not understood by this build.
    #[error("unsupported checkpoint version {found} (supported: {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },

    /// Checkpoint contents do not match their checksum.
    #[error("checkpoint integrity error: {0}")]
    Integrity(String),

    /// No candidate in the initial population produced a finite fitness.
    #[error("search initialization failed: every candidate in the initial population failed")]
    AllCandidatesFailed,

    /// A caller broke an API contract (e.g. cache/timestep mismatch).
    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}
