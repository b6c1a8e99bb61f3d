use thiserror::Error;

/// Errors raised anywhere in the construction pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("element has {got} coordinates, group expects {expected}")]
    SpecMismatch { expected: usize, got: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid generating set: {0}")]
    InvalidGenerators(String),

    #[error("generator {0} has finite order")]
    TorsionGenerator(usize),

    #[error("Cayley graph is not one-ended (free rank {0} < 2)")]
    NotOneEnded(usize),

    #[error("colouring is not almost-standard: {0}")]
    NotAlmostStandard(String),

    #[error("square is not standard: {0}")]
    NotStandardSquare(String),

    #[error("vertex {0} is not on the double-ray")]
    NotOnRay(String),

    #[error("component walk exceeded its budget of {0} steps")]
    BudgetExceeded(usize),

    #[error("vertex {vertex} has {degree} incident edges of colour {colour}")]
    NotTwoRegular {
        vertex: String,
        colour: usize,
        degree: usize,
    },

    #[error("no simple coset path found: {0}")]
    CosetPathNotFound(String),

    #[error("cycle-combining map is not injective at square {0}")]
    AlphaNotInjective(usize),

    #[error("expected a finite cycle through {0}")]
    UnexpectedComponent(String),

    #[error("no fresh reserved ray left for coset step {0}")]
    NoFreshRay(usize),

    #[error("invariant {condition} violated: {detail}")]
    InvariantViolation { condition: String, detail: String },

    #[error("window is not stable yet: {0}")]
    WindowNotStable(String),

    #[error("edge {0} is not in any decomposition member")]
    EdgeNotInDecomposition(String),

    #[error("ray stream has no vertex at position {0}")]
    StreamExhausted(i64),

    #[error("label {0} is not on the ray")]
    LabelNotOnRay(u64),

    #[error("resource limit: {0}")]
    ResourceLimit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invariant(condition: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::InvariantViolation {
            condition: condition.into(),
            detail: detail.into(),
        }
    }
}
