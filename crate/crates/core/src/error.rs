use alloc::string::String;

/// Errors raised by the algebra core.
///
/// Identity violations discovered by the checkers are *not* errors; they are
/// returned as report content. Errors are reserved for malformed input and
/// for pipelines that cannot continue.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("coordinate index {index} out of range for a chart of dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("invalid chart: {0}")]
    InvalidChart(String),

    #[error("chart mismatch: {0}")]
    ChartMismatch(String),

    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("rank mismatch: expected {expected}, found {found}")]
    RankMismatch { expected: usize, found: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("mixed-parity endomorphism where a homogeneous one is required")]
    MixedParity,

    #[error("form of degree {expected} evaluated on {found} arguments")]
    Arity { expected: usize, found: usize },

    #[error("value kind mismatch: {0}")]
    ValueKind(String),

    #[error("carrier check failed: {0}")]
    CarrierCheck(String),

    #[error("not function-linear in slot {slot} (probe {probe}): residual {residual}")]
    LinearityViolation {
        slot: usize,
        probe: String,
        residual: String,
    },

    #[error("d Tr_s(k^{p}) is not closed: residual {residual}")]
    ClosednessViolation { p: usize, residual: String },

    #[error("form does not live on a cylinder carrier")]
    NotCylinder,

    #[error("connection axiom failure: {0}")]
    Axiom(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
