use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid source: {0}")]
    InvalidSource(String),

    #[error("insufficient digits: {required} required, {available} available")]
    InsufficientDigits { required: usize, available: usize },

    #[error("bad magic: not an .nbits stream")]
    BadMagic,

    #[error("unsupported .nbits version {0}")]
    UnsupportedVersion(u8),

    #[error("truncated payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: u64, found: u64 },

    #[error("nonzero pad bits in final payload byte")]
    NonzeroPadding,

    #[error("vector must have at least one entry")]
    EmptyVector,

    #[error("undefined angle: zero vector")]
    UndefinedAngle,

    #[error(
        "non-standard vector for n = {n} exceeds the materialization cap {cap}; use ns_profile"
    )]
    NsTooLarge { n: usize, cap: usize },

    #[error("invalid block length k = {k} for {available} digits")]
    InvalidBlockLength { k: u32, available: usize },

    #[error("checkpoints must be strictly increasing and positive")]
    InvalidCheckpoints,

    #[error("unknown claim `{0}`")]
    UnknownClaim(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("draw index {index} out of range for block of size {block_size}")]
    DrawIndexOutOfRange { index: u64, block_size: u64 },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
