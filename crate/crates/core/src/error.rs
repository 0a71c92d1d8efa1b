use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("evaluation at focal endpoint rho = {rho} (density vanishes)")]
    FocalEndpoint { rho: f64 },

    #[error("weight is not positive and finite at x = {x} (value {value})")]
    BadWeight { x: f64, value: f64 },

    #[error("fit window degenerate: {usable} usable samples, need at least {needed}")]
    DegenerateFit { usable: usize, needed: usize },

    #[error("non-positive density sample {value} at rho = {rho} inside fit window")]
    NonPositiveSample { rho: f64, value: f64 },

    #[error("non-finite value at step {step} (t = {time})")]
    NonFinite { step: usize, time: f64 },

    #[error("extrapolation diverged: estimates {estimates:?}")]
    ExtrapolationDiverged { estimates: Vec<f64> },

    #[error("conjugate gradient did not converge after {iterations} iterations (relative residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("degenerate metric at node ({i}, {j}): EG - F^2 = {det}")]
    DegenerateMetric { i: usize, j: usize, det: f64 },

    #[error("root finding failed: {0}")]
    RootFind(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
