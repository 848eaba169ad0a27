use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("corrupt data: {0}")]
    Corrupt(String),

    #[error("range {start}+{len} outside 0..{total}")]
    OutOfBounds { start: u64, len: u64, total: u64 },

    #[error("not an RLZ archive (bad magic)")]
    BadMagic,

    #[error("unsupported archive version {0}")]
    Version(u16),

    #[error("archive header checksum mismatch")]
    Checksum,

    #[error("unknown document id {0:?}")]
    UnknownDocument(String),

    #[error("query at offset {start}: {source}")]
    Query { start: u64, source: Box<Error> },

    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Param(msg.into())
    }

    pub(crate) fn corrupt(msg: impl Into<String>) -> Self {
        Error::Corrupt(msg.into())
    }

    /// True for errors caused by damaged or foreign input data rather than
    /// caller mistakes or the operating system.
    pub fn is_corruption(&self) -> bool {
        match self {
            Error::Query { source, .. } => source.is_corruption(),
            e => matches!(e, Error::Corrupt(_) | Error::BadMagic | Error::Version(_) | Error::Checksum),
        }
    }
}
