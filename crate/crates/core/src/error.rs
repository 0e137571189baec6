use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {point:?} lies outside the chart ball of radius {radius}")]
    ChartDomain { point: Vec<f64>, radius: f64 },

    #[error("invalid chart: {0}")]
    InvalidChart(String),

    #[error("curve is not strictly convex at theta = {theta:.6}: curvature {curvature:.6e}")]
    ConvexityViolation { theta: f64, curvature: f64 },

    #[error("invalid curve parameters: {0}")]
    InvalidCurve(String),

    #[error("inner curve is not contained in the outer curve: {0}")]
    Containment(String),

    #[error("grid folds at node (s index {i}, theta index {j}): jacobian determinant {det:.6e}")]
    GridDegeneracy { i: usize, j: usize, det: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("point {point:?} lies outside the ring")]
    OutsideRing { point: Vec<f64> },

    #[error("blend map inversion did not converge at {point:?} (last step {last_step:.3e})")]
    Inversion { point: Vec<f64>, last_step: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("linear solver breakdown: {reason}; residual history {history:?}")]
    LinearSolver { reason: String, history: Vec<f64> },

    #[error("gradient norm {norm:.3e} is below the floor {floor:.3e}")]
    SingularGradient { norm: f64, floor: f64 },

    #[error("level {level} is outside the open range ({low}, {high})")]
    LevelOutOfRange { level: f64, low: f64, high: f64 },

    #[error("level set topology: {0}")]
    Topology(String),

    #[error("continuation failed: step underflow after last good tau {last_good_tau}")]
    ContinuationFailure { last_good_tau: f64 },

    #[error("oracle infeasible: tau {tau} exceeds the maximal height {max_height}")]
    OracleInfeasible { tau: f64, max_height: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
