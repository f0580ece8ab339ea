//! Error type shared by every module of the crate.

use std::path::PathBuf;

/// Result alias used throughout the crate.
pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report.
///
/// Variants are grouped by the caller's likely reaction: input/format
/// problems ([`Error::Parse`], [`Error::Dimension`], [`Error::Order`],
/// [`Error::DataIntegrity`]), configuration or precondition violations
/// ([`Error::Validation`], [`Error::Config`], [`Error::Param`],
/// [`Error::Type`], [`Error::NotImplemented`]), analysis outcomes that
/// callers are expected to handle ([`Error::UndefinedQuality`],
/// [`Error::NoObjects`], [`Error::Disjointness`]) and plain I/O.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed line in one of the text formats.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Feature vectors of differing dimension inside one trace.
    #[error("dimension error at line {line}: expected {expected}, found {found}")]
    Dimension {
        line: usize,
        expected: usize,
        found: usize,
    },

    /// Records handed to a writer out of (fid, rank) order.
    #[error("order error: {0}")]
    Order(String),

    /// A stored artefact disagrees with itself (e.g. a frame missing from an index).
    #[error("data integrity error: {0}")]
    DataIntegrity(String),

    /// An input document violates its declared invariants.
    #[error("validation error: {0}")]
    Validation(String),

    /// Unknown or inconsistent configuration.
    #[error("config error: {0}")]
    Config(String),

    /// A numeric parameter is outside its admissible range.
    #[error("parameter error: {0}")]
    Param(String),

    /// An operator was applied to a column of the wrong kind.
    #[error("type error: {0}")]
    Type(String),

    /// Accepted by the interface but deliberately not implemented.
    #[error("not implemented: {0}")]
    NotImplemented(String),

    /// Cluster quality is undefined (single cluster or singletons only).
    #[error("cluster quality undefined: {0}")]
    UndefinedQuality(String),

    /// The trace holds no objects, so a per-object statistic is undefined.
    #[error("trace contains no objects")]
    NoObjects,

    /// Outputs expected to be key-disjoint share a key.
    #[error("disjointness violation: {0}")]
    Disjointness(String),

    /// Underlying file-system failure.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// JSON (de)serialisation failure for one of the JSON documents.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the file system rather than by content.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }

    /// Stable machine-readable code for the error kind.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::Dimension { .. } => "dimension",
            Error::Order(_) => "order",
            Error::DataIntegrity(_) => "data_integrity",
            Error::Validation(_) => "validation",
            Error::Config(_) => "config",
            Error::Param(_) => "param",
            Error::Type(_) => "type",
            Error::NotImplemented(_) => "not_implemented",
            Error::UndefinedQuality(_) => "undefined_quality",
            Error::NoObjects => "no_objects",
            Error::Disjointness(_) => "disjointness",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
        }
    }
}
