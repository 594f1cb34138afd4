use thiserror::Error;

/// Errors shared by every stage of the pipeline.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unknown letter {0}")]
    UnknownLetter(String),
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("invalid game: {0}")]
    InvalidGame(String),
    #[error("sort mismatch: expected a value of coalition {expected:#b}, got {found:#b}")]
    SortMismatch { expected: u32, found: u32 },
    #[error("move is infeasible from the current configuration")]
    InfeasibleMove,
    #[error("exploration limit exceeded after {nodes} nodes ({configs} configurations, {values} interned values)")]
    LimitExceeded { nodes: usize, configs: usize, values: usize },
    #[error("configuration was never explored")]
    UnknownClass,
    #[error("color clash inside one class: {0}")]
    ColorClashBug(String),
    #[error("the player does not win")]
    NotWinning,
    #[error("depth {0} exceeds the configured maximum {1}")]
    DepthExceeded(usize, usize),
    #[error("arena too large for enumeration ({0} nodes)")]
    TooLarge(usize),
    #[error("visibility check requested without an act map")]
    MissingActMap,
    #[error("independent constructions disagree: {0}")]
    OracleMismatch(String),
    #[error("schema error: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, Error>;
