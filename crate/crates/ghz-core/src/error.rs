use crate::register::Basis;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("basis mismatch: expected {expected:?}, got {got:?}")]
    BasisMismatch { expected: Basis, got: Basis },

    #[error("sector {n} outside 0..={max}")]
    Sector { n: usize, max: usize },

    #[error("sector 0 has no oscillator path (coupling undefined)")]
    EmptySector,

    #[error("argument {z} outside the domain of Lambert W branch {branch}")]
    LambertDomain { branch: i32, z: f64 },

    #[error("Lambert W iteration did not converge for z = {z}")]
    LambertConvergence { z: f64 },

    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("step budget of {steps} exhausted at t = {t}")]
    StepBudget { steps: usize, t: f64 },

    #[error("null space has dimension {dim}; steady state is not unique")]
    Degenerate { dim: usize },

    #[error("closed-form loss rates assume symmetric branching ratios")]
    AsymmetricBranching,

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParam { name, reason: reason.into() }
}
