use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the engine can report. Each variant maps to a stable
/// machine-readable code (see [`Error::code`]) used by the CLI and the
/// HTTP service.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("move set #{0} is empty")]
    EmptySet(usize),
    #[error("vertex {vertex} is out of range for a game on {n} vertices")]
    IndexOutOfRange { vertex: usize, n: usize },
    #[error("vertices {missing:?} are not covered by any move set")]
    CoverageGap { missing: Vec<usize> },
    #[error("unknown game id `{0}`")]
    UnknownId(String),
    #[error("bad parameters for `{id}`: {reason}")]
    BadParameters { id: String, reason: String },
    #[error("cannot load game file `{path}`: {reason}")]
    FileFormat { path: String, reason: String },
    #[error("expected {expected} entries, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("removal exceeds the height of stack {index}")]
    NegativeResult { index: usize },
    #[error("{what} is limited to {limit} vertices, got {n}")]
    TooLarge { what: &'static str, n: usize, limit: usize },
    #[error("vertex {0} is not empty and cannot be zero-reduced")]
    NonZeroVertex(usize),
    #[error("zero reduction would remove every vertex")]
    EmptyResult,
    #[error("merge precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("stack {0} would become negative")]
    NegativeHeight(usize),
    #[error("reduced move is illegal: {0}")]
    IllegalReducedMove(String),
    #[error("work budget of {0} option evaluations exceeded")]
    BudgetExceeded(u64),
    #[error("unsupported parameters: {0}")]
    UnsupportedParameters(String),
    #[error("no closed-form oracle for `{0}`")]
    UnsupportedGame(String),
    #[error("no case matched reduced position {0}")]
    NoCaseMatched(String),
    #[error("circuit complex is not pointed")]
    NotPointed,
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptySet(_) => "empty_set",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::CoverageGap { .. } => "coverage_gap",
            Error::UnknownId(_) => "unknown_game",
            Error::BadParameters { .. } => "bad_parameters",
            Error::FileFormat { .. } => "file_format",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NegativeResult { .. } => "negative_result",
            Error::TooLarge { .. } => "too_large",
            Error::NonZeroVertex(_) => "non_zero_vertex",
            Error::EmptyResult => "empty_result",
            Error::PreconditionViolated(_) => "precondition_violated",
            Error::NegativeHeight(_) => "negative_height",
            Error::IllegalReducedMove(_) => "illegal_reduced_move",
            Error::BudgetExceeded(_) => "budget_exceeded",
            Error::UnsupportedParameters(_) => "unsupported_parameters",
            Error::UnsupportedGame(_) => "unsupported_game",
            Error::NoCaseMatched(_) => "no_case_matched",
            Error::NotPointed => "not_pointed",
            Error::Internal(_) => "internal",
        }
    }

    /// True for failures that indicate a bug in the engine rather than bad
    /// input or an exhausted budget.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::NoCaseMatched(_) | Error::Internal(_))
    }
}
