use thiserror::Error;

/// Every failure the toolkit reports. Variants carry enough context to be
/// turned into a one-line message or an FFI error code.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cannot combine scalars of mode {0} and {1}")]
    ModeMismatch(&'static str, &'static str),
    #[error("operation not available in this scalar mode: {0}")]
    ModeError(String),
    #[error("structure constants are not associative at basis triple ({0}, {1}, {2})")]
    NonAssociative(usize, usize, usize),
    #[error("declared unit index {0} does not act as a two-sided unit")]
    BadUnit(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("forms belong to different algebras")]
    AlgebraMismatch,
    #[error("result needs degree {needed} but truncation is {trunc}")]
    TruncationOverflow { needed: usize, trunc: usize },
    #[error("operator requires a homogeneous form of degree {expected}, got {got}")]
    WrongDegree { expected: String, got: usize },
    #[error("input has a component in degree zero where it is not defined")]
    DegreeZeroInput,
    #[error("map is not an algebra homomorphism at basis pair ({0}, {1})")]
    NotAHomomorphism(usize, usize),
    #[error("matrix is not an idempotent")]
    NotIdempotent,
    #[error("triple is malformed: {0}")]
    MalformedTriple(String),
    #[error("operator fails the required parity: {0}")]
    ParityError(String),
    #[error("chain parity does not match the triple: {0}")]
    ParityMismatch(String),
    #[error("heat time must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error("form is not of top degree {expected}: found degree {got}")]
    NotTopDegree { expected: usize, got: usize },
    #[error("unresolved reference: {0}")]
    Resolution(String),
    #[error("cochain targets do not match: {0}")]
    TargetMismatch(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("path grid is too coarse: {0}")]
    GridTooCoarse(String),
    #[error("form is not integrable: {0}")]
    NotIntegrable(String),
    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
