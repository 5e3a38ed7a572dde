use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("row {row} sums to {sum}, expected 1 within 1e-9")]
    NotStochastic { row: usize, sum: f64 },

    #[error("row {row} has invalid entry ({col}, {value}): {reason}")]
    InvalidEntry {
        row: usize,
        col: usize,
        value: f64,
        reason: &'static str,
    },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("power iteration did not converge within {cap} iterations")]
    NotConverged { cap: usize },

    #[error("mixing time for eps={eps} not reached by t_max={t_max}")]
    NotMixed { eps: f64, t_max: usize },

    #[error("chain is not {0}")]
    NotErgodic(&'static str),

    #[error("row of vertex {vertex} is not rational: entry {value} has no fraction with denominator <= {max_denominator}")]
    NotRational {
        vertex: usize,
        value: f64,
        max_denominator: u64,
    },

    #[error("router of vertex {vertex} is corrupted: {detail}")]
    CorruptRouter { vertex: usize, detail: String },

    #[error("router of vertex {vertex} has served {served} tokens but the engine expected {expected}")]
    RouterDesync {
        vertex: usize,
        served: u64,
        expected: u64,
    },

    #[error("state space too large: {count} states exceeds cap {cap}")]
    CapExceeded { count: u64, cap: u64 },

    #[error("partial order contains a cycle")]
    CyclicOrder,

    #[error("trace does not retain flows; rerun with store_flows enabled")]
    FlowsNotRetained,

    #[error("emission budget exceeded: M*T = {0} > 2^62")]
    Overflow(u128),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
