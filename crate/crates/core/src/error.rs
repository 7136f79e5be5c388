use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid edge id {0} (mesh has {1} edges)")]
    InvalidEdge(usize, usize),

    #[error("degenerate triangle {0} (zero or negative area)")]
    DegenerateTriangle(usize),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not positive definite: non-positive pivot at index {0}")]
    NotPositiveDefinite(usize),

    #[error("sparse factorization failed: {0}")]
    Factorization(String),

    #[error("MINRES breakdown at iteration {0}")]
    Breakdown(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point ({0}, {1}) lies outside the mesh")]
    PointOutsideMesh(f64, f64),

    #[error("meshes are not nested")]
    NotNested,

    #[error("non-finite value {value} at ({x}, {y})")]
    NonFinite { value: f64, x: f64, y: f64 },

    #[error("coefficient is not coercive: {0}")]
    NotCoercive(String),

    #[error("singular local system on element {0}")]
    SingularLocalSystem(usize),

    #[error("empty indicator set")]
    EmptyIndicators,

    #[error("recurrence lost positivity at degree {0}")]
    RecurrenceBreakdown(usize),

    #[error("root bracketing failed for eigenvalue {0}")]
    BracketFailure(usize),

    #[error("maximum number of iterations ({0}) reached before the tolerance was met")]
    MaxIterations(usize),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
