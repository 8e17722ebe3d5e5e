use thiserror::Error;

/// Errors produced by the numerical engine.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid chain parameters: {0}")]
    InvalidParams(String),

    #[error("momentum {0} outside (0, pi]")]
    MomentumOutOfRange(f64),

    #[error("chain of {n_sites} sites exceeds the configured maximum of {max}")]
    SizeLimit { n_sites: usize, max: usize },

    /// A mode of the momentum grid has (numerically) zero energy.
    #[error("degenerate mode: Lambda_k = {value:e} at k = {momentum}; use the even-N grid or offset the coupling")]
    DegenerateMode { momentum: f64, value: f64 },

    #[error("determinant order {order} outside 1..={max_order}")]
    OrderOutOfRange { order: usize, max_order: usize },

    #[error("fast determinant at order {order} deviates from pivoted elimination: {fast:e} vs {reference:e}")]
    CrossCheckFailure {
        order: usize,
        fast: f64,
        reference: f64,
    },

    #[error("correlator table lacks the yy/zz families needed here")]
    MissingCorrelators,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("non-positive value {value:e} at x = {x} in a logarithmic fit")]
    NonPositiveData { x: f64, value: f64 },

    #[error("domain-wall position {n} outside 0..={n_sites}")]
    WallOutOfRange { n: usize, n_sites: usize },

    #[error("ground state is degenerate (gap {gap:e})")]
    DegenerateGroundState { gap: f64 },

    #[error("exact diagonalization limited to N <= {max}, got {n_sites}")]
    OracleTooLarge { n_sites: usize, max: usize },

    #[error("iterative eigensolver did not converge (residual {residual:e})")]
    EigenNotConverged { residual: f64 },

    #[error("invalid coupling grid: {0}")]
    InvalidGrid(String),

    #[error("maximum of dN_eff/dlambda lies on the grid boundary at lambda = {lambda} (N = {n_sites})")]
    PeakOnBoundary { n_sites: usize, lambda: f64 },

    #[error("rescaled curves share no common x-range")]
    NoOverlap,

    #[error("fit window [{lo}, {hi}] reaches within 10/N of the peak at {lambda_m}")]
    WindowTooClose { lo: f64, hi: f64, lambda_m: f64 },

    #[error("evaluation failed at N = {n_sites}, lambda = {coupling}: {source}")]
    AtPoint {
        n_sites: usize,
        coupling: f64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
