use thiserror::Error;

/// Errors raised by the physics kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter violated its documented domain.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate circuit: mass matrix determinant {det:e} below tolerance")]
    DegenerateCircuit { det: f64 },

    #[error("eigensolver did not converge after {iterations} iterations (worst residual {residual:e})")]
    EigenNonConvergence { iterations: usize, residual: f64 },

    #[error("model out of range: {0}")]
    ModelOutOfRange(String),

    /// Evaluation within the guard distance of a band edge, where the
    /// spectral density has an inverse-square-root singularity.
    #[error("band-edge singularity at omega = {omega}")]
    BandEdge { omega: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "quadrature did not reach tolerance: estimate {estimate:e}, error {error:e} after {evaluations} evaluations"
    )]
    QuadratureLimit {
        estimate: f64,
        error: f64,
        evaluations: usize,
    },

    #[error("oracle configuration violates causality: t_max = {t_max} but horizon is {horizon}")]
    Causality { t_max: f64, horizon: f64 },

    #[error("norm drift {drift:e} exceeds tolerance; reduce the integrator step")]
    StepSize { drift: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
