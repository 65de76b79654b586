use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Closed forms exist only for a restricted set of orders.
    #[error("unsupported order {order}: {detail}")]
    UnsupportedOrder { order: f64, detail: &'static str },

    /// Both inter-arrival and claim variances vanish (D^2 = 0).
    #[error("degenerate model: D^2 = 0 (both variances are zero)")]
    DegenerateModel,

    /// An integration range is empty or malformed.
    #[error("invalid interval: lo = {lo}, hi = {hi}")]
    InvalidInterval { lo: f64, hi: f64 },

    /// Adaptive quadrature stopped before reaching the requested tolerance.
    #[error("quadrature did not converge: achieved {achieved:.3e}, requested {requested:.3e}")]
    QuadratureNoConvergence { achieved: f64, requested: f64 },

    /// Infinite horizon requested where the integrand tail cannot be truncated.
    #[error("unsupported horizon: t = inf requires the integrand tail to decay ({0})")]
    UnsupportedHorizon(String),

    /// A run configuration failed validation.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
