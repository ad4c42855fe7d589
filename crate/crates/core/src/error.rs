use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("quadrature did not converge: doubling the order moved a component by {change:e}")]
    QuadratureUnconverged { change: f64 },

    #[error("degenerate sample: {0}")]
    DegenerateSample(&'static str),

    #[error("point leaves the metric domain: {0}")]
    DomainViolation(String),

    #[error("analytic metric derivatives are not available for this field")]
    AnalyticDerivativesUnavailable,

    #[error("reparametrization Jacobian is singular (det = {det:e})")]
    SingularJacobian { det: f64 },

    #[error("rate constant A(r) vanishes; only the constant path (a1 = a2 = 0) is defined")]
    DegenerateRate,

    #[error("sigma collapsed below the underflow guard at tau = {tau}")]
    SigmaCollapse { tau: f64 },

    #[error("step size controller failed at tau = {tau} (h = {step:e})")]
    StepFailure { tau: f64, step: f64 },

    #[error("power-law window holds {nodes} nodes, need at least {required}")]
    InsufficientWindow { nodes: usize, required: usize },
}
