use thiserror::Error;

use crate::bankruptcy::RegimeClass;
use crate::dimensions::Dimension;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: {left} vs {right}")]
    DimensionMismatch {
        context: String,
        left: Dimension,
        right: Dimension,
    },
    #[error("division by zero")]
    DivisionByZero,
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("cannot parse unit `{input}`: {reason}")]
    UnitParse { input: String, reason: String },

    #[error("{0} violated")]
    Validation(String),
    #[error("flow of production must be positive here, got {0}")]
    NonPositiveFlow(f64),
    #[error("zero curvature (B = 0): no interior optimum")]
    ZeroCurvature,
    #[error("zero inertial mass: the adjustment law degenerates to static mode")]
    ZeroMass,
    #[error("invalid cost schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("state became non-finite at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("no zero crossing of q within the {horizon} y horizon")]
    NoBracket { horizon: f64 },
    #[error("firm is not declining ({0})")]
    NotDeclining(RegimeClass),
    #[error("survival time lost when perturbing `{param}` on the {side} side: {reason}")]
    RootLost {
        param: String,
        side: &'static str,
        reason: String,
    },

    #[error("mapping to the boat model requires c + G = 0")]
    TrendedModel,

    #[error("unknown figure preset `{0}`")]
    UnknownPreset(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn validation(what: impl Into<String>) -> Self {
        Error::Validation(what.into())
    }
}
