use thiserror::Error;

/// Errors raised by grid construction, functional evaluation and the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("hypothesis {hypothesis} violated: {detail}")]
    Hypothesis {
        hypothesis: &'static str,
        detail: String,
    },

    #[error("{stage} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        stage: String,
        iterations: usize,
        residual: f64,
    },

    #[error("minimizer pinned to the ball boundary: ‖u‖ = {norm:.6e}, α = {alpha:.6e}")]
    PinnedToBoundary { norm: f64, alpha: f64 },

    #[error("no endpoint with negative energy found up to t = {t_max:.3e}")]
    EndpointNotFound { t_max: f64 },

    #[error("path maximum {level:.6e} fell below the ring level ρ = {rho:.6e}")]
    PathCollapse { level: f64, rho: f64 },

    #[error("continuation stage {stage} (μ = {mu}) failed: {source}")]
    ContinuationStage {
        stage: usize,
        mu: f64,
        #[source]
        source: Box<SolverError>,
    },

    #[error(
        "cut-off route not certified: ‖u₁‖ = {norm:.6e}, M₀ = {m0:.6e}, λ = {lambda:.3e}, M₀⁻³ = {gate:.3e}"
    )]
    CutoffNotCertified {
        norm: f64,
        m0: f64,
        lambda: f64,
        gate: f64,
    },

    #[error("λ = {lambda:.3e} is not below M₀⁻³ = {gate:.3e} (M₀ = {m0:.6e})")]
    LambdaGate { lambda: f64, m0: f64, gate: f64 },

    #[error("energy ordering violated: I(u₀) = {e0:.6e}, I(u₁) = {e1:.6e}")]
    EnergyOrdering { e0: f64, e1: f64 },
}

pub type Result<T> = std::result::Result<T, SolverError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> SolverError {
    SolverError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
