use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at byte {position}: expected {expected}")]
    Syntax { position: usize, expected: String },
    #[error("presentation has no generators")]
    EmptyGeneratorSet,
    #[error("word is empty")]
    EmptyWord,
    #[error("presentation has no relators")]
    NoRelators,
    #[error("model has no finite presentation")]
    NoPresentation,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown generator index {0}")]
    UnknownGenerator(usize),
    #[error("rewriting completion incomplete after {budget_used} steps ({rules_found} rules)")]
    Incomplete { rules_found: usize, budget_used: usize },
    #[error("budget exceeded (estimated size {estimated_size})")]
    BudgetExceeded { estimated_size: u64 },
    #[error("radius {requested} out of range (ball radius {radius})")]
    RadiusOutOfRange { requested: u32, radius: u32 },
    #[error("no path inside the ball")]
    NoPathWithinBall,
    #[error("path is empty")]
    EmptyPath,
    #[error("exhaustive search found nothing")]
    NotFound,
    #[error("no path avoids the forbidden ball")]
    NoAvoidingPath,
    #[error("word does not represent the identity")]
    NotIdentity,
    #[error("non-planar assembly: {0}")]
    NonPlanarAssembly(String),
    #[error("diagram labels inconsistent with the group at dart {0}")]
    InconsistentLabels(usize),
    #[error("invalid data: {0}")]
    InvalidData(String),
}

pub type Result<T> = std::result::Result<T, Error>;
