//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A system file could not be parsed at the syntax level.
    #[error("malformed file {path}: {reason}")]
    MalformedFile { path: String, reason: String },

    /// A parsed system violates a structural invariant.
    #[error("invalid system: {0}")]
    InvalidSystem(String),

    /// A placement order is not a permutation of the chiplet indices.
    #[error("invalid order: {0}")]
    InvalidOrder(String),

    /// The sequential placer ran out of legal positions.
    #[error("unplaceable: no legal position for chiplet {chiplet} (step {step})")]
    Unplaceable { chiplet: String, step: usize },

    /// Full enumeration was requested above the permutation cap.
    #[error("too many orders: {n} chiplets exceed the all-permutations cap of {cap}")]
    TooManyOrders { n: usize, cap: usize },

    /// An operation that needs scatter points received none.
    #[error("empty scatter")]
    EmptyScatter,

    /// Scaler fitting needs at least one graph.
    #[error("empty corpus: no graphs to fit the scaler on")]
    EmptyCorpus,

    /// The pair sampler found no two points with different levels.
    #[error("no comparable pairs: all points share the same level")]
    NoComparablePairs,

    /// A tensor dimension does not match the layer it was fed to.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// Pooling over a graph with no nodes.
    #[error("empty graph")]
    EmptyGraph,

    /// Training requires at least one pair.
    #[error("empty dataset: no training pairs")]
    EmptyDataset,

    /// A checkpoint file is syntactically or structurally broken.
    #[error("malformed checkpoint: {0}")]
    MalformedCheckpoint(String),

    /// A checkpoint was written by an incompatible format version.
    #[error("checkpoint version mismatch: found {found}, expected {expected}")]
    VersionMismatch { found: u32, expected: u32 },

    /// An evaluated order is absent from the sweep it should be looked up in.
    #[error("missing sweep entry for order {order} in system {system}")]
    MissingSweep { system: String, order: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("usage error: {0}")]
    Usage(String),
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 1 usage, 2 data, 3 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 1,
            Error::MalformedFile { .. }
            | Error::InvalidSystem(_)
            | Error::InvalidOrder(_)
            | Error::Unplaceable { .. }
            | Error::TooManyOrders { .. }
            | Error::EmptyScatter
            | Error::EmptyCorpus
            | Error::NoComparablePairs
            | Error::EmptyDataset
            | Error::MalformedCheckpoint(_)
            | Error::VersionMismatch { .. }
            | Error::MissingSweep { .. }
            | Error::Io { .. } => 2,
            Error::ShapeMismatch(_) | Error::EmptyGraph => 3,
        }
    }
}
