//! Library-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cache point ({mu_r}, {mu_t}) is infeasible: requires mu_r + 3*mu_t >= 1 and both in [0,1]")]
    InfeasibleCachePoint { mu_r: String, mu_t: String },

    #[error("integer point ({m},{n}) caches everything at the receivers; nothing to deliver")]
    NothingToDeliver { m: u8, n: u8 },

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("splitting ratios violate constraint {index}: {detail}")]
    ConstraintViolation { index: usize, detail: String },

    #[error("cache budget exceeded at {node}: needs {used} bits, budget {budget} bits")]
    BudgetExceeded { node: String, used: u64, budget: u64 },

    #[error("subfile for file {file} cached at rx {rx_set:?} / tx {tx_set:?} is available at no transmitter")]
    MissingSubfile { file: usize, rx_set: Vec<usize>, tx_set: Vec<usize> },

    #[error("scheme {scheme} requires {requirement}, got M={m}, N={n}")]
    DimensionMismatch { scheme: String, requirement: String, m: u32, n: u32 },

    #[error("null space of {context} has dimension {got}, expected {expected} (non-generic channel draw)")]
    RankDeficient { context: String, got: usize, expected: usize },

    #[error("internal consistency failure: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
