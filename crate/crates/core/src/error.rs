use thiserror::Error;

/// Errors raised by the analysis library.
///
/// `Undecidable` and `Inconclusive` are honest mathematical outcomes (more
/// precision or a different input might settle them); everything else is a
/// usage or input error.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("undefined coefficient at index {0}")]
    UndefinedCoefficient(usize),
    #[error("exponent range exceeded: {0}")]
    Range(String),
    #[error("degenerate window [{start}, {end}]: every Turán ratio is undefined")]
    DegenerateWindow { start: usize, end: usize },
    #[error("undecidable at {precision} bits: {what}")]
    Undecidable { what: String, precision: u32 },
    #[error("predicate {predicate} is not monotone: holds at {holds_at} but fails at {fails_at}")]
    NonMonotone {
        predicate: String,
        holds_at: String,
        fails_at: String,
    },
    #[error("complex coefficient at index {0}; a real series is required")]
    ComplexCoefficient(usize),
    #[error("not applicable: {0}")]
    Inapplicable(String),
    #[error("window precondition violated at indices {indices:?}: {reason}")]
    WindowPrecondition { indices: Vec<usize>, reason: String },
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("no limit: {0}")]
    NoLimit(String),
    #[error("lambda must be nonzero: sigma f = g has no unique bounded preimage; use left_extend")]
    ZeroLambda,
    #[error("coefficient {index} of the series is {found}; expected {expected}")]
    Mismatch {
        index: usize,
        found: String,
        expected: String,
    },
}

impl Error {
    /// Whether this is an "needs more bits / no decision" outcome rather
    /// than a failure.
    pub fn is_inconclusive(&self) -> bool {
        matches!(
            self,
            Error::Undecidable { .. } | Error::Inconclusive(_) | Error::NoLimit(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
