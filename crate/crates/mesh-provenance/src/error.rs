use std::path::PathBuf;

use thiserror::Error;

use crate::model::ReviewKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the library.
///
/// Anything not covered by a variant here (I/O, CSV, JSON) is wrapped with
/// enough context to point at the offending file or record.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid tree number `{text}`: {reason}")]
    InvalidTreeNumber { text: String, reason: String },

    #[error("invalid term: {0}")]
    InvalidTerm(String),

    #[error("invalid concept `{concept_id}`: {reason}")]
    InvalidConcept { concept_id: String, reason: String },

    #[error("invalid descriptor `{descriptor_id}`: {reason}")]
    InvalidDescriptor {
        descriptor_id: String,
        reason: String,
    },

    #[error("invalid supplementary record `{scr_id}`: {reason}")]
    InvalidScr { scr_id: String, reason: String },

    #[error("invalid annotation record `{descriptor_id}`: {reason}")]
    InvalidRecord {
        descriptor_id: String,
        reason: String,
    },

    #[error(
        "concept `{concept_id}` belongs to both descriptor `{first}` and descriptor `{second}` \
         in the {year} version; each concept may belong to a single descriptor"
    )]
    DuplicateConcept {
        year: i32,
        concept_id: String,
        first: String,
        second: String,
    },

    #[error("duplicate record id `{id}` in the {year} version")]
    DuplicateRecord { year: i32, id: String },

    #[error("XML parse error at byte {offset}: {message}")]
    Xml { offset: u64, message: String },

    #[error("descriptor `{id}` is not present in the {year} version")]
    UnknownDescriptor { id: String, year: i32 },

    #[error("descriptor `{d0}` is not an ancestor of `{d1}`: no tree-number prefix pair")]
    NotAncestor { d1: String, d0: String },

    #[error("invalid provenance code {category}.{ptype}")]
    InvalidCode { category: u8, ptype: u8 },

    #[error("invalid {what} token `{token}`")]
    InvalidToken { what: &'static str, token: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}:{line}: {message}")]
    ConfigLine {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("missing MeSH version files for year(s) {}", join_years(.0))]
    MissingVersions(Vec<i32>),

    #[error("missing annotation CSV files for year(s) {}", join_years(.0))]
    MissingAnnotations(Vec<i32>),

    #[error(
        "override row for `{descriptor_id}` ({kind}): id `{id}` does not exist in the target version"
    )]
    OverrideUnknownId {
        descriptor_id: String,
        kind: ReviewKind,
        id: String,
    },

    #[error("duplicate override row for `{descriptor_id}` ({kind})")]
    OverrideDuplicate {
        descriptor_id: String,
        kind: ReviewKind,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {message}")]
    FileFormat { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn file(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::File {
            path: path.into(),
            source,
        }
    }

    pub fn file_format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::FileFormat {
            path: path.into(),
            message: message.into(),
        }
    }
}

fn join_years(years: &[i32]) -> String {
    years
        .iter()
        .map(|y| y.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}
