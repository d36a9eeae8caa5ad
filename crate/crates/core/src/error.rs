use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("argument outside the domain of {function}: {value}")]
    Domain { function: &'static str, value: f64 },

    #[error("Kirchhoff inverse failed for chi = {chi}: {reason}")]
    KirchhoffInverse { chi: f64, reason: String },

    #[error("invalid mesh: {0}")]
    Mesh(String),

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("eigen solver failed: {0}")]
    Eigen(String),

    #[error(
        "nonlinear iteration did not converge at step {step} after {iterations} iterations \
         (mechanics residual {mech_residual:.3e}, flow residual {flow_residual:.3e})"
    )]
    NonConvergence {
        step: usize,
        iterations: usize,
        mech_residual: f64,
        flow_residual: f64,
    },

    #[error("root of the non-degeneracy criterion not found: {0}")]
    NoRoot(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
