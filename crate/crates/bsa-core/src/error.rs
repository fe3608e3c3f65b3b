use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("stream length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid stream value {ones}/{len}: need len >= 1 and ones <= len")]
    InvalidValue { ones: u64, len: u64 },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("unsupported stream length {n} for {unit}: {reason}")]
    UnsupportedLength {
        unit: &'static str,
        n: usize,
        reason: &'static str,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{0}")]
    InvalidArgument(String),

    #[error(
        "successive processing unsupported for {unit}: it emits {m} bits per {n}-bit input, \
         and a unit can only consume back-to-back streams when output and input lengths match"
    )]
    SuccessiveUnsupported {
        unit: &'static str,
        m: usize,
        n: usize,
    },
}
