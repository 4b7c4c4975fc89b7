//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("edge list parse error at line {line}: {msg}")]
    EdgeListParse { line: usize, msg: String },

    #[error("self-loop ({unit},{unit}) is not allowed")]
    SelfLoop { unit: usize },

    #[error("graph has no units")]
    EmptyGraph,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degree {degree} exceeds the PMF reference support 0..={d_max_ref}")]
    DegreeOutOfSupport { degree: usize, d_max_ref: usize },

    #[error("PMF supports differ: {left} vs {right} entries")]
    SupportMismatch { left: usize, right: usize },

    #[error("isolated set has {size} unit(s); a two-arm split needs at least 2")]
    IsolatedSetTooSmall { size: usize },

    #[error("assignment carries no strata; run matched-pairs randomization first")]
    MissingStrata,

    #[error("estimator arm `{arm}` is empty")]
    EmptyArm { arm: &'static str },

    #[error("contagion process did not reach a fixed point within {max_steps} steps")]
    ContagionNonConvergence {
        max_steps: usize,
        /// State at the final step.
        last: Vec<u8>,
        /// State one step earlier.
        prev: Vec<u8>,
    },

    #[error("every candidate weight produced a degenerate isolated set")]
    AllCandidatesDegenerate,

    #[error("graph with {n} units is too large for exact enumeration (limit {limit})")]
    EnumerationTooLarge { n: usize, limit: usize },

    #[error("unknown method id `{0}`")]
    UnknownMethod(String),

    #[error("unknown weight id `{0}` (expected degree^<l> or spectral^<l>)")]
    UnknownWeightId(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("csv parse error at line {line}: {msg}")]
    CsvParse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
