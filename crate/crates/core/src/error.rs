use alloc::string::String;
use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("a game needs at least one strategy")]
    EmptyGame,
    #[error("payoff row {row} has {len} entries, expected {expected}")]
    RaggedRow { row: usize, len: usize, expected: usize },
    #[error("payoff entry ({row}, {col}) is not finite")]
    NonFinitePayoff { row: usize, col: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("weight {index} = {value} lies outside [0, 1]")]
    WeightOutOfRange { index: usize, value: f64 },
    #[error("weights sum to {sum}, expected 1")]
    SimplexSum { sum: f64 },
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("support enumeration handles at most {max} strategies, got {n}")]
    TooManyStrategies { n: usize, max: usize },
    #[error("not a rest point: field norm {norm:e} exceeds {limit:e}")]
    NotRestPoint { norm: f64, limit: f64 },
    #[error("matrix is not a valid {kind}: {reason}")]
    InvalidMatrix { kind: &'static str, reason: String },
    #[error("non-finite state encountered at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("{name} drifted to {value:e} at t = {t} (limit {limit:e})")]
    InvariantDrift { name: &'static str, value: f64, limit: f64, t: f64 },
    #[error("eigenvalue {value:e} is below zero; not a density operator")]
    NegativeEigenvalue { value: f64 },
    #[error("cluster {index} has non-positive weight {value}")]
    NonPositiveWeight { index: usize, value: f64 },
}

impl Error {
    /// True for failures raised while integrating, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonFiniteState { .. } | Error::InvariantDrift { .. } | Error::NegativeEigenvalue { .. })
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
