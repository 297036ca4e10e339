use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("empty sentence")]
    EmptySentence,

    #[error("no training data")]
    NoTrainingData,

    #[error("n-gram order {0} outside 1..=3")]
    InvalidOrder(usize),

    #[error("gap position {position} outside 1..={max} for a sentence of {len} tokens")]
    PositionOutOfRange {
        position: usize,
        max: usize,
        len: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("line count mismatch: {hypotheses} hypotheses vs {references} references")]
    LineCountMismatch { hypotheses: usize, references: usize },

    #[error("malformed data: {0}")]
    Data(String),

    #[error("not a model artifact (bad magic)")]
    BadMagic,

    #[error("unsupported model format version {found} (expected {expected})")]
    UnsupportedVersion { found: u32, expected: u32 },

    #[error("corrupt model artifact: {0}")]
    Format(String),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::BadMagic | Error::UnsupportedVersion { .. } | Error::Format(_) => 3,
            _ => 2,
        }
    }
}
