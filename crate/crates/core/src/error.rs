//! Error type shared by every module of the crate.
//!
//! Each variant belongs to one error class. The class decides the process exit
//! code of the CLI and the status code returned across the C ABI.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid architecture: {0}")]
    InvalidArchitecture(String),

    #[error("shape mismatch: expected {expected}, got {actual} ({context})")]
    Shape {
        expected: usize,
        actual: usize,
        context: &'static str,
    },

    #[error("label {label} out of range for inventory of size {size}")]
    LabelRange { label: usize, size: usize },

    #[error("index {index} out of range ({what}, limit {limit})")]
    Range {
        what: &'static str,
        index: usize,
        limit: usize,
    },

    #[error("empty data: {0}")]
    EmptyData(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("incomplete table: {0}")]
    IncompleteTable(String),

    #[error("incomplete map: source label {label} has no entry")]
    IncompleteMap { label: usize },

    #[error("duplicate entry for source label {label} (line {line})")]
    DuplicateEntry { label: usize, line: usize },

    #[error("incomplete map set: no map from language {source_lang} to language {target_lang}")]
    IncompleteMapSet { source_lang: usize, target_lang: usize },

    #[error("unknown language id {0}")]
    UnknownLanguage(usize),

    #[error("inventory mismatch: {0}")]
    Inventory(String),

    #[error("invalid split fractions: {0}")]
    Fraction(String),

    #[error("invalid synthetic corpus spec: {0}")]
    Spec(String),

    #[error("missing baseline row")]
    MissingBaseline,

    #[error("parse error in {path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("malformed {what}: {msg}")]
    Format { what: &'static str, msg: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn format(what: &'static str, msg: impl Into<String>) -> Self {
        Error::Format {
            what,
            msg: msg.into(),
        }
    }

    pub(crate) fn shape(expected: usize, actual: usize, context: &'static str) -> Self {
        Error::Shape {
            expected,
            actual,
            context,
        }
    }

    /// Short stable name of the error class.
    pub fn class(&self) -> &'static str {
        match self {
            Error::InvalidArchitecture(_) => "invalid-architecture",
            Error::Shape { .. } => "shape",
            Error::LabelRange { .. } => "label-range",
            Error::Range { .. } => "range",
            Error::EmptyData(_) => "empty-data",
            Error::Config(_) => "config",
            Error::IncompleteTable(_) => "incomplete-table",
            Error::IncompleteMap { .. } => "incomplete-map",
            Error::DuplicateEntry { .. } => "duplicate-entry",
            Error::IncompleteMapSet { .. } => "incomplete-mapset",
            Error::UnknownLanguage(_) => "unknown-language",
            Error::Inventory(_) => "inventory",
            Error::Fraction(_) => "fraction",
            Error::Spec(_) => "spec",
            Error::MissingBaseline => "missing-baseline",
            Error::Parse { .. } => "parse",
            Error::Format { .. } => "format",
            Error::Io { .. } => "io",
        }
    }

    /// Numeric code of the error class, 10 and up. Lower values are left to
    /// callers for success and their own failures.
    pub fn code(&self) -> i32 {
        match self {
            Error::InvalidArchitecture(_) => 10,
            Error::Shape { .. } => 11,
            Error::LabelRange { .. } => 12,
            Error::Range { .. } => 13,
            Error::EmptyData(_) => 14,
            Error::Config(_) => 15,
            Error::IncompleteTable(_) => 16,
            Error::IncompleteMap { .. } => 17,
            Error::DuplicateEntry { .. } => 18,
            Error::IncompleteMapSet { .. } => 19,
            Error::UnknownLanguage(_) => 20,
            Error::Inventory(_) => 21,
            Error::Fraction(_) => 22,
            Error::Spec(_) => 23,
            Error::MissingBaseline => 24,
            Error::Parse { .. } => 25,
            Error::Format { .. } => 26,
            Error::Io { .. } => 27,
        }
    }
}
