use thiserror::Error;

/// Errors produced by the solvers and reconstruction pipeline.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid grid: {reason}")]
    InvalidGrid { reason: String },

    #[error("trajectory blow-up at node {node}: state became non-finite")]
    TrajectoryBlowUp { node: usize },

    #[error("contract violation in {operation}: {reason}")]
    ContractViolation { operation: String, reason: String },

    #[error("numerically singular system: pivot {pivot:.3e} below {threshold:.3e}")]
    NumericallySingular { pivot: f64, threshold: f64 },

    #[error("plane-wave matching rejected: k = 0 makes the basis degenerate")]
    ZeroWavenumber,

    #[error(
        "Picard did not converge after {iterations} iterations (last residual {residual:.3e})"
    )]
    PicardDidNotConverge { iterations: usize, residual: f64 },

    #[error(
        "Wronskian inconsistency: relative deviation {deviation:.3e} exceeds {tolerance:.3e} at k = {k}"
    )]
    WronskianInconsistency {
        deviation: f64,
        tolerance: f64,
        k: String,
    },

    #[error("near bound state / resonance: |B1| = {magnitude:.3e} at k = {k}")]
    NearResonance { magnitude: f64, k: String },

    #[error(
        "contour passes near a zero of B1 at mode m = {mode}; raise xi (|B1| = {magnitude:.3e})"
    )]
    ContourNearResonance { mode: i64, magnitude: f64 },

    #[error("ill-conditioned extraction (condition estimate {condition:.3e}); adjust eps_list")]
    IllConditionedExtraction { condition: f64 },

    #[error("Neumann series not guaranteed; raise xi (contraction estimate {estimate:.3e} >= 1)")]
    NeumannNotContractive { estimate: f64 },

    #[error("Neumann series diverged: term norm grew to {term_norm:.3e} after {terms} terms")]
    NeumannDiverged { terms: usize, term_norm: f64 },

    #[error("xi must be positive, got {xi}")]
    NonPositiveXi { xi: f64 },

    #[error("scattering data is defined on the real k-axis only and cannot be evaluated at k = {k}; supply a generative model for complex k")]
    ComplexEvalUnsupported { k: String },

    #[error("data source provides no order-{order} coefficients")]
    MissingOrder { order: usize },

    #[error("solver error at k = {k}, eps = {eps}: {source}")]
    SweepEntry {
        k: f64,
        eps: String,
        #[source]
        source: Box<Error>,
    },

    #[error("order {order} reconstruction failed: {source}")]
    OrderTagged {
        order: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn contract(operation: &str, reason: impl Into<String>) -> Self {
        Error::ContractViolation {
            operation: operation.to_string(),
            reason: reason.into(),
        }
    }

    pub fn at_order(self, order: usize) -> Self {
        Error::OrderTagged {
            order,
            source: Box::new(self),
        }
    }
}
