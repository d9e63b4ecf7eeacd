//! Error type shared by every module of the crate.

use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("malformed schema document at line {line}, column {column}: {message}")]
    MalformedSchema {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("duplicate group name `{name}` (line {line})")]
    DuplicateGroup { name: String, line: usize },

    #[error("duplicate label `{label}` in group `{group}` (line {line})")]
    DuplicateLabel {
        group: String,
        label: String,
        line: usize,
    },

    #[error("group `{name}` has no labels (line {line})")]
    EmptyGroup { name: String, line: usize },

    #[error("invalid identifier `{name}` (line {line}): names must match [a-z0-9_]+ and be at most 64 chars")]
    InvalidName { name: String, line: usize },

    #[error("schema has no groups")]
    EmptySchema,

    #[error("combination space overflows a 64-bit index")]
    CombinationOverflow,

    #[error("combination index {index} out of range (combination count {count})")]
    IndexOutOfRange { index: u64, count: u64 },

    #[error("assignment has {got} entries but the schema has {expected} groups")]
    AssignmentLength { expected: usize, got: usize },

    #[error("label index {label} out of range for group `{group}`")]
    LabelOutOfRange { group: String, label: usize },

    #[error("unknown group `{0}`")]
    UnknownGroup(String),

    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),

    #[error("row {row}: {message}")]
    Row { row: usize, message: String },

    #[error("missing column `{0}` in score table header")]
    MissingColumn(String),

    #[error("empty bucket")]
    EmptyBucket,

    #[error("attribute `{attribute}` not measurable: {reason}")]
    NotMeasurable { attribute: String, reason: String },

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    File { path: PathBuf, message: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 3,
            Error::NotMeasurable { .. } => 4,
            _ => 2,
        }
    }

    /// Wraps an error with the file it came from, keeping I/O errors intact.
    pub fn in_file(self, path: impl Into<PathBuf>) -> Self {
        match self {
            e @ Error::Io { .. } => e,
            other => Error::File {
                path: path.into(),
                message: other.to_string(),
            },
        }
    }
}
