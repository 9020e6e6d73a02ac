//! Crate-wide error type.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// The branch graph does not connect all buses, so no impedance matrix exists.
    #[error("disconnected network: bus {0} is not reachable from bus 0")]
    Disconnected(usize),

    /// A matrix that must be inverted is singular or numerically unusable.
    /// For the fault-calculation path this means there is no synchronous
    /// source grounding the network.
    #[error("no synchronous source: admittance matrix is singular (condition estimate {cond:.3e})")]
    NoSynchronousSource { cond: f64 },

    /// Generic singular-matrix failure outside the admittance path.
    #[error("singular matrix in {context}")]
    Singular { context: &'static str },

    /// The droop coupling matrix of the explicit fault-current formula is singular.
    #[error("droop matrix singular")]
    DroopMatrixSingular,

    /// Fixed-point fault-current iteration ran out of iterations. Carries the
    /// voltage-drop trace recorded so far; convergence is guaranteed for the
    /// supported (purely reactive) model, so hitting this signals bad inputs.
    #[error("short-circuit iteration exceeded {k_max} iterations (fault bus {fault_bus})")]
    SccIterationLimit {
        fault_bus: usize,
        k_max: usize,
        trace: Vec<Vec<f64>>,
    },

    /// Mismatched dimensions between data that must line up.
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// A numeric input failed validation.
    #[error("invalid value for {field}: {message}")]
    InvalidValue { field: &'static str, message: String },

    /// The constrained fit has no feasible coefficient vector; increase nu.
    #[error("coefficient fit infeasible for nu={nu}: increase nu")]
    FitInfeasible { nu: f64 },

    /// No value in the nu grid produced a feasible fit.
    #[error("no feasible nu in grid ({tried} values tried, limit {limit})")]
    NuGridExhausted { tried: usize, limit: f64 },

    /// The optimization backend reports the model infeasible.
    #[error("model infeasible{}", hint.as_deref().map(|h| format!(": {h}")).unwrap_or_default())]
    Infeasible { hint: Option<String> },

    /// The optimization backend failed for a non-infeasibility reason.
    #[error("solver failure: {0}")]
    Solver(String),

    /// A structured input file failed validation.
    #[error("parse error in {file} ({location}): {message}")]
    Parse {
        file: String,
        location: String,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("toml error: {0}")]
    TomlDe(#[from] toml::de::Error),

    #[error("toml error: {0}")]
    TomlSer(#[from] toml::ser::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidValue {
            field,
            message: message.into(),
        }
    }
}
