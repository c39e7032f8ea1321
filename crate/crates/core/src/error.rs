use thiserror::Error;

pub type Result<T, E = OdmError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum OdmError {
    /// Generation or composition would exceed the configured order or size budget.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("schema violation in field `{field}`: {message}")]
    Schema { field: String, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{context}: no convergence after {iterations} iterations (last iterate {last_iterate}, residual {residual:e})")]
    NonConvergence {
        context: String,
        iterations: usize,
        last_iterate: String,
        residual: f64,
    },

    #[error("branch ambiguity: {0}")]
    BranchAmbiguity(String),

    #[error("no candidate root for order {k} in tau window [{lo}, {hi}]; nearest candidates: {nearest:?}")]
    EmptyWindow {
        k: usize,
        lo: f64,
        hi: f64,
        nearest: Vec<String>,
    },

    #[error("least-squares system is rank deficient: {0}")]
    RankDeficient(String),

    #[error("singular Padé system for [{l}/{m}]")]
    SingularPade { l: usize, m: usize },

    #[error("Padé approximant [{l}/{m}] has a pole at the evaluation point")]
    PadePole { l: usize, m: usize },

    #[error("quadrature did not reach {target} digits (best estimate {achieved:.1} digits)")]
    AccuracyNotReached { target: f64, achieved: f64 },

    #[error("eigenvalue tracking ambiguity at g = {g}: overlap {overlap:.3} below 0.5")]
    TrackingAmbiguity { g: f64, overlap: f64 },

    #[error("no crossing: {0}")]
    NoCrossing(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
