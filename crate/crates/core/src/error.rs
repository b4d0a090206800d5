use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension not implemented: n = {0}")]
    UnsupportedDimension(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("length mismatch: expected {expected} samples, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("aliasing risk: band limit {requested} exceeds {max} for this grid")]
    AliasingRisk { requested: usize, max: usize },

    #[error("{operator} restricted to even functions (odd energy {odd_energy:.3e})")]
    OddInput { operator: &'static str, odd_energy: f64 },

    #[error("{what} must be positive; found {value:.6e} at node {node}")]
    NonPositive { what: &'static str, value: f64, node: usize },

    #[error("body is not origin-symmetric: |rho(u) - rho(-u)| = {0:.3e}")]
    NotSymmetric(f64),

    #[error("convexity certificate failed: least eigenvalue {min_eigenvalue:.3e} at node {node}{}", max_t.map(|t| format!("; maximal admissible t = {t:.6e}")).unwrap_or_default())]
    NonConvex { min_eigenvalue: f64, node: usize, max_t: Option<f64> },

    #[error("convexity failure on the Radon arc at angle {angle:.6} (h + h'' = {value:.3e})")]
    NonConvexArc { angle: f64, value: f64 },

    #[error("singular second-moment matrix (det = {0:.3e})")]
    SingularMoment(f64),

    #[error("outside contraction regime: increment grew for {steps} consecutive steps")]
    Divergence { steps: usize, trace: Box<crate::ma_solver::MaSolveTrace> },

    #[error("nonconvex perturbation for t = {0:?}")]
    NonConvexScan(Vec<f64>),

    #[error("{0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
