use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("spectrum evaluated at a pole ({pole} rad/s, omega = {omega} rad/s)")]
    Pole { omega: f64, pole: f64 },
    #[error("singular linear solve (condition estimate {condition:.3e}): {context}")]
    Singular { condition: f64, context: String },
    #[error("steady state is not unique: {dimension} near-null directions")]
    DegenerateSteadyState { dimension: usize },
    #[error("integration failed at t = {time:.6e} s: {reason}")]
    Integration { time: f64, reason: String },
    #[error("positivity violated at t = {time:.6e} s: minimum eigenvalue {min_eigenvalue:.3e}")]
    Positivity { time: f64, min_eigenvalue: f64 },
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("no data: {0}")]
    NoData(String),
    #[error("unstable extrapolation: map norm {norm:.6} at step {step}; increase the training window")]
    Unstable { norm: f64, step: usize },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
