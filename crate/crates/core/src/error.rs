use thiserror::Error;

/// Rejected stack or benchmark configuration.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("thread count must be at least 1, got {0}")]
    NoThreads(usize),
    #[error("range width W must be at least 2, got {0}")]
    RangeTooNarrow(u64),
    #[error("push ratio must lie in [0, 1], got {0}")]
    PushRatio(f64),
    #[error("history window must hold at least 3 operations, got {0}")]
    WindowTooSmall(usize),
    #[error("history window of {0} operations exceeds the checker bound of {1}")]
    WindowTooLarge(usize, usize),
}

/// A structural problem found while walking the predecessor chain.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("index did not decrease along the chain: node {upper} links to node {lower}")]
    NonDecreasing { upper: u64, lower: u64 },
    #[error("chain did not reach the sentinel within {0} hops")]
    Unterminated(usize),
}
