use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed tag at line {line}, offset {offset}: {message}")]
    MalformedTag {
        line: usize,
        offset: usize,
        message: String,
    },

    #[error("unknown field `{field}` at line {line}, offset {offset}")]
    UnknownField {
        field: String,
        line: usize,
        offset: usize,
    },

    #[error("alignment error at token {index}: document has {expected:?}, annotation has {found:?}")]
    Alignment {
        index: usize,
        expected: Option<String>,
        found: Option<String>,
    },

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("invalid split plan: {0}")]
    InvalidPlan(String),

    #[error("gazetteer vocabulary is empty (window={window}, min_freq={min_freq})")]
    EmptyVocabulary { window: usize, min_freq: usize },

    #[error("unknown PoS tag `{0}`")]
    UnknownTag(String),

    #[error("missing resource for feature `{0}`")]
    MissingResource(String),

    #[error("invalid model specification: {0}")]
    InvalidSpec(String),

    #[error("model validation failed: {0}")]
    Validation(String),

    #[error("unsupported format version `{found}` (expected `{expected}`)")]
    VersionMismatch { expected: String, found: String },

    #[error("checksum mismatch (file truncated or modified)")]
    ChecksumMismatch,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("evidence has zero probability (first dead time step {step})")]
    ZeroProbabilityEvidence { step: usize },

    #[error("numerical inconsistency: {0}")]
    Numeric(String),

    #[error("overlapping spans in document `{doc}` at token {token}")]
    OverlappingSpans { doc: String, token: usize },

    #[error("gold tag path of document `{doc}` is impossible at token {token}")]
    InconsistentGold { doc: String, token: usize },

    #[error("empty corpus: {0}")]
    EmptyCorpus(String),

    #[error("document sets do not align: {0}")]
    DocumentMismatch(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<String>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short stable identifier, used in machine-readable error lines.
    pub fn code(&self) -> &'static str {
        match self {
            Error::MalformedTag { .. } => "MalformedTag",
            Error::UnknownField { .. } => "UnknownField",
            Error::Alignment { .. } => "AlignmentError",
            Error::MissingColumn(_) => "MissingColumn",
            Error::InvalidPlan(_) => "InvalidPlan",
            Error::EmptyVocabulary { .. } => "EmptyVocabulary",
            Error::UnknownTag(_) => "UnknownTag",
            Error::MissingResource(_) => "MissingResource",
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::Validation(_) => "ValidationError",
            Error::VersionMismatch { .. } => "VersionMismatch",
            Error::ChecksumMismatch => "ChecksumMismatch",
            Error::Parse { .. } => "ParseError",
            Error::ZeroProbabilityEvidence { .. } => "ZeroProbabilityEvidence",
            Error::Numeric(_) => "NumericError",
            Error::OverlappingSpans { .. } => "OverlappingSpans",
            Error::InconsistentGold { .. } => "InconsistentGold",
            Error::EmptyCorpus(_) => "EmptyCorpus",
            Error::DocumentMismatch(_) => "AlignmentError",
            Error::Config(_) => "ConfigError",
            Error::Io { .. } => "IoError",
        }
    }

    /// Process exit code: 2 for usage errors, 3 for data errors, 4 for
    /// numeric/convergence errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::ZeroProbabilityEvidence { .. } | Error::Numeric(_) => 4,
            _ => 3,
        }
    }
}
