use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside its legal range.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative method hit its iteration cap before stabilizing.
    #[error("{what} did not converge within {limit} iterations")]
    Convergence { what: &'static str, limit: usize },

    /// The requested truncated state space is larger than the configured limit.
    #[error("state space of {states} states exceeds the limit of {limit}")]
    Capacity { states: usize, limit: usize },

    /// The chain induced by a policy has more than one recurrent class, so
    /// long-run averages are not well defined from a single run.
    #[error("policy-induced chain is not unichain: {0} recurrent classes")]
    Nondegenerate(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
