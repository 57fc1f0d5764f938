use thiserror::Error;

/// Errors produced by the solver crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid configuration or violated precondition, named explicitly.
    #[error("configuration error: {0}")]
    Config(String),

    /// A landmark root bracket could not be located.
    #[error("landmark search failed: {0}")]
    Landmark(String),

    /// A growth or shape hypothesis on the nonlinearity does not hold.
    #[error("hypothesis failure: {0}")]
    Hypothesis(String),

    /// The fixed-point startup iteration did not contract.
    #[error("startup iteration failed: {0}")]
    Startup(String),

    /// The integrator stopped abnormally; carries the last valid state.
    #[error("integration failed at r = {r}: {message} (u = {u}, v = {v})")]
    Integration { r: f64, u: f64, v: f64, message: String },

    /// Barrier profile construction failed (typically a divergent quadrature).
    #[error("barrier construction failed: {0}")]
    Barrier(String),

    /// A parameter search (bracketing or bisection) failed.
    #[error("search failed: {0}")]
    Search(String),

    /// An internal contract between modules was violated.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 validation, 3 numerical, 4 search.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Config(_) | Error::Contract(_) => 2,
            Error::Landmark(_)
            | Error::Hypothesis(_)
            | Error::Startup(_)
            | Error::Integration { .. }
            | Error::Barrier(_) => 3,
            Error::Search(_) => 4,
            Error::Io(_) => 1,
        }
    }
}
