use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// The underlying error with any location wrappers removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Located { error, .. } => error.root(),
            other => other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("graph must have at least one vertex")]
    EmptyGraph,
    #[error("edges[{index}]: vertex {vertex} out of range for {n} vertices")]
    VertexOutOfRange { index: usize, vertex: usize, n: usize },
    #[error("edges[{index}]: loop edge at vertex {vertex}")]
    LoopEdge { index: usize, vertex: usize },
    #[error("edges[{index}]: duplicate edge ({u},{v})")]
    DuplicateEdge { index: usize, u: usize, v: usize },
    #[error("graph is disconnected: vertex {unreached} not reachable from vertex 0")]
    Disconnected { unreached: usize },
    #[error("dimension mismatch: {what} has length {got}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("potential q[{vertex}] is not finite")]
    NonFinitePotential { vertex: usize },
    #[error("cut parameter gamma[{index}] = {value} must be finite and nonzero")]
    GammaZeroOrInfinite { index: usize, value: f64 },
    #[error("edge ({u},{v}) is not an edge of the graph")]
    UnknownEdge { u: usize, v: usize },
    #[error("edge ({u},{v}) carries no phase in the assignment")]
    MissingEdgePhase { u: usize, v: usize },
    #[error("edge ({u},{v}) is a spanning-tree edge, not a surplus edge")]
    RequestedEdgeNotSurplus { u: usize, v: usize },
    #[error("surplus edge index {index} out of range (betti number {betti})")]
    SurplusIndexOutOfRange { index: usize, betti: usize },
    #[error("level {level} out of range 1..={dim}")]
    LevelOutOfRange { level: usize, dim: usize },
    #[error("eigenvalue at level {level} is degenerate (gap {gap:e} <= {tol:e})")]
    DegenerateEigenvalue { level: usize, gap: f64, tol: f64 },
    #[error("eigenvector entry at vertex {vertex} vanishes (|f| = {value:e})")]
    VanishingEntry { vertex: usize, value: f64 },
    #[error("level {level} is not generic: {reason}")]
    NonGenericLevel { level: usize, reason: String },
    #[error("operator is not real symmetric; sign counting needs a real eigenbasis")]
    ComplexEigenbasis,
    #[error("eigensolver did not converge on a {dim}x{dim} matrix")]
    ConvergenceFailure { dim: usize },
    #[error("scan needs at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("cannot place {beta} surplus edges on {n} vertices (at most {max})")]
    InfeasibleBeta { beta: usize, n: usize, max: usize },
    #[error("invalid instance spec: {0}")]
    InvalidSpec(String),
    #[error("{0}")]
    Parse(String),
    #[error("{location}: {error}")]
    Located { location: String, error: Box<Error> },
    #[error("{0}")]
    Io(String),
}
