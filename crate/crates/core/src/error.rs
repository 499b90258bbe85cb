use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimensions n={n}, p={p}: {reason}")]
    InvalidDimensions { n: usize, p: usize, reason: String },

    #[error("rank {rank} out of range for C({n},{p}) = {count}")]
    RankOutOfRange {
        rank: usize,
        n: usize,
        p: usize,
        count: usize,
    },

    #[error("malformed tuple {indices:?} for n={n}, p={p}")]
    MalformedTuple {
        indices: Vec<usize>,
        n: usize,
        p: usize,
    },

    #[error("tuple tables disagree: ({n1},{p1}) vs ({n2},{p2})")]
    MismatchedTables {
        n1: usize,
        p1: usize,
        n2: usize,
        p2: usize,
    },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric at ({row},{col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("non-finite matrix entry at ({row},{col})")]
    NonFinite { row: usize, col: usize },

    #[error("spectrum outside the closed cone: tuple {tuple:?} has sum {margin}")]
    ConeViolation { tuple: Vec<usize>, margin: f64 },

    #[error("tuple {tuple:?} has vanishing sum {sum}; use the adjugate route")]
    DivisionHazard { tuple: Vec<usize>, sum: f64 },

    #[error("sampler exhausted after {attempts} attempts (n={n}, p={p}, c={c})")]
    SamplerExhausted {
        n: usize,
        p: usize,
        c: f64,
        attempts: usize,
    },

    #[error("polynomial is not symmetric")]
    NotSymmetricPolynomial,

    #[error("expansion too large: n={n} exceeds the cap of {cap}")]
    ExpansionTooLarge { n: usize, cap: usize },

    #[error("parse error at {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("node {node:?} is on the boundary; the stencil needs interior nodes")]
    Stencil { node: Vec<usize> },

    #[error("cone breach at node {node:?}: margin {margin}")]
    ConeBreach { node: Vec<usize>, margin: f64 },

    #[error("line search failed: {0}")]
    LineSearch(String),

    #[error("singular linearization: {0}")]
    SingularLinearization(String),

    #[error("barrier ordering violated at node {node:?}: w - u = {gap}")]
    BarrierOrdering { node: Vec<usize>, gap: f64 },

    #[error("grids do not match: {0}")]
    GridMismatch(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
