use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A documented precondition of an operation was violated by the caller.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Order doubling did not bring the quadrature error estimate under tolerance.
    #[error(
        "quadrature did not converge: estimate {estimate:e} above tolerance {tolerance:e} at order {order}"
    )]
    Quadrature {
        estimate: f64,
        tolerance: f64,
        order: usize,
    },

    /// The intensity family has no registered upper bound, so rejection sampling is impossible.
    #[error("no sup bound available for intensity family `{0}`")]
    NoSupBound(String),

    /// The Metropolis-Hastings chain rejected every proposal for too long.
    #[error("chain stuck: {rejections} consecutive rejected proposals")]
    ChainStuck { rejections: u64 },

    /// A computation would exceed its configured budget.
    #[error("resource limit: {0}")]
    Resource(String),

    /// Malformed experiment configuration or function specification.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}
