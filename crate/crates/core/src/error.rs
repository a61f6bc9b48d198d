use thiserror::Error;

/// Crate-wide error type. Variants mirror the failure modes of the public
/// operations: argument validation, table range, memory budgets, numeric
/// domains, and integer overflow guards.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("query {value} exceeds table limit {limit}")]
    OutOfRange { value: f64, limit: u64 },

    #[error("memory budget exceeded: need {required} bytes, budget {budget} bytes")]
    Resource { required: u64, budget: u64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("integer overflow computing {0}")]
    Overflow(&'static str),

    #[error("realization has no recorded edges; rerun with record_edges")]
    MissingEdges,

    #[error("pmf truncation drops {dropped:.3e} probability mass (limit {limit:.1e})")]
    TruncatedMass { dropped: f64, limit: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
