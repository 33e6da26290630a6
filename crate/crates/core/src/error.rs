use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CribError {
    #[error("a delta distribution cannot be evaluated pointwise")]
    UnsupportedPointEvaluation,

    #[error("kernel is singular at omega = {omega} (box band edge)")]
    SingularPoint { omega: f64 },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid pulse: {0}")]
    InvalidPulse(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("quadrature did not converge (achieved relative change {achieved:.3e}, {nodes} nodes)")]
    QuadratureNotConverged { achieved: f64, nodes: usize },

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("state error: {0}")]
    State(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = CribError> = std::result::Result<T, E>;

impl From<std::io::Error> for CribError {
    fn from(e: std::io::Error) -> Self {
        CribError::Io(e.to_string())
    }
}
