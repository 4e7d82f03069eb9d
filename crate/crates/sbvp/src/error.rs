//! Crate-wide error type.

/// Errors produced by the solver library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("incompatible grids: {0}")]
    IncompatibleGrids(String),

    #[error("unsupported alpha {0}: require alpha >= 1")]
    UnsupportedAlpha(f64),

    #[error("unsupported Bessel order {0}: require |nu| <= 50")]
    UnsupportedOrder(f64),

    #[error("lambda must be nonzero")]
    DegenerateLambda,

    #[error("no sign change of {family} of order {nu} found below x = {limit}")]
    ZeroNotFound { family: &'static str, nu: f64, limit: f64 },

    #[error("resonant lambda = {lambda}: |denominator| = {denom_abs:.3e}")]
    ResonantLambda { lambda: f64, denom_abs: f64 },

    #[error("hypothesis {name} fails at lambda = {lambda}: {detail}")]
    HypothesisViolation { name: String, lambda: f64, detail: String },

    #[error("quadrature did not converge: best estimate {best:.12e}, error estimate {err_est:.3e}")]
    IntegrationFailure { best: f64, err_est: f64 },

    #[error("monotonicity breach at iteration {iter}, x = {x}: gap {gap:.3e}")]
    MonotonicityBreach { iter: usize, x: f64, gap: f64 },

    #[error("enclosure violation at x = {x}: gap {gap:.3e}")]
    EnclosureViolation { x: f64, gap: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("Newton iteration diverged after {0} steps")]
    NewtonDiverged(usize),

    #[error("singular Jacobian in finite-difference solve")]
    SingularJacobian,

    #[error("evaluation error: {0}")]
    Eval(String),
}

pub type Result<T> = std::result::Result<T, Error>;
