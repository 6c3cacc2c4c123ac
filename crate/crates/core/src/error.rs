//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The master-equation integrator left its validity envelope
    /// (trace drift, negativity, or phonon-tail population beyond
    /// tolerance). The message carries diagnostics and a remedy hint.
    #[error("integrator failure: {0}")]
    IntegratorFailure(String),

    /// Process-matrix reconstruction did not reproduce a held-out input.
    #[error("qpt reconstruction inconsistent: residual {residual:.3e} > {tol:.3e}")]
    InconsistentReconstruction { residual: f64, tol: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
