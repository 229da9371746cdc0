use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed arguments: out-of-range indices, mismatched dimensions, empty grids.
    #[error("invalid input: {0}")]
    Input(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A matrix failed one of the Rado premises (partition-regular,
    /// irredundant, positive density denominators).
    #[error("validation failed: {0}")]
    Validation(String),

    /// `m(A, B)` was asked for with `m(A) < m(B)`.
    #[error("density ordering violated: m(A) = {m_a} < m(B) = {m_b}; swap the matrices")]
    Ordering { m_a: String, m_b: String },

    /// A size guard refused the work before starting it.
    #[error("refused: {what} estimated at {estimate}, above the cap of {cap}")]
    Guard {
        what: String,
        estimate: f64,
        cap: f64,
    },

    /// Exhausted the search-node budget.
    #[error("search budget of {budget} nodes exhausted")]
    Budget { budget: u64 },

    /// A state that the theory rules out, e.g. an infeasible weight LP.
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
