use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("hypersurface is singular along the line: the jet components share the root factor {0}")]
    SingularAlongLine(String),
    #[error("degenerate curve: det A_C = 0 (normal bundle not balanced)")]
    Degenerate,
    #[error("curve lies on a wall: {0}")]
    DegenerateOnWall(String),
    #[error("normal bundle not balanced: splitting-section space has dimension {found}, expected {expected}")]
    NotBalanced { found: usize, expected: usize },
    #[error("non-generic curve: {0}")]
    NonGenericCurve(String),
    #[error("invalid secant: {0}")]
    InvalidSecant(String),
    #[error("incomplete enumeration: {0}")]
    IncompleteEnumeration(String),
    #[error("numeric failure: {0}")]
    NumericFailure(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("degenerate plane configuration: {0}")]
    DegenerateConfig(String),
    #[error("no rational point found on the conic; supply one in the configuration")]
    SupplyPointRequired,
    #[error("non-generic path: {0}")]
    NonGenericPath(String),
}

pub type Result<T> = std::result::Result<T, Error>;
