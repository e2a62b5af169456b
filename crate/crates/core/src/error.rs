use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty corpus")]
    EmptyCorpus,

    #[error("malformed UTF-8 on line {line}")]
    MalformedText { line: usize },

    #[error("unknown symbol {cluster:?} at byte offset {offset}")]
    UnknownSymbol { cluster: String, offset: usize },

    #[error("symbol index {index} out of range for alphabet of size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("interaction range {range} outside 1..={max}")]
    InvalidRange { range: usize, max: usize },

    #[error("rank {rank} out of range for alphabet of size {size}")]
    RankOutOfRange { rank: usize, size: usize },

    #[error("sector exhausted: every candidate is penalized at step {step}")]
    SectorExhausted { step: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unsupported model format version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("malformed model file: {0}")]
    MalformedModel(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
