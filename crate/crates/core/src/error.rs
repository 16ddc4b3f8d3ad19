use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("geometry: {0}")]
    Geometry(String),

    #[error("unknown residue `{0}`")]
    UnknownResidue(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{path}:{line}: {msg}")]
    Format {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("checksum mismatch in {0}")]
    Checksum(String),

    #[error("unsupported format version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error("empty corpus: no usable residues")]
    EmptyCorpus,

    #[error("no parsable residues in structure")]
    NoResidues,

    #[error("structure `{0}` not found")]
    NotFound(String),

    #[error("network error fetching `{id}`: {msg}")]
    Network { id: String, msg: String },

    #[error("{path}: {source}")]
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

    /// Network failures may succeed on a later attempt; everything else will not.
    pub fn is_retriable(&self) -> bool {
        matches!(self, Error::Network { .. })
    }
}
