use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("invalid rank vector: {0}")]
    InvalidRank(String),

    #[error("mode {mode} out of range 1..={max}")]
    ModeOutOfRange { mode: usize, max: usize },

    #[error("index {index:?} out of bounds for shape {dims:?}")]
    IndexOutOfBounds { index: Vec<usize>, dims: Vec<usize> },

    #[error("value count {got} does not match shape size {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("core chain mismatch at core {core}: {detail}")]
    ChainMismatch { core: usize, detail: String },

    #[error("requested rank {requested:?} is below the measured TT rank {measured:?}")]
    RankInfeasible {
        requested: Vec<usize>,
        measured: Vec<usize>,
    },

    #[error("canonical block of mode {mode} is numerically singular (σ_min/σ_max = {ratio:e})")]
    SingularCanonicalBlock { mode: usize, ratio: f64 },

    #[error("canonical form needs r_i <= n_i, but mode {mode} has n = {size} < r = {rank}")]
    CanonicalFormUnavailable {
        mode: usize,
        size: usize,
        rank: usize,
    },

    #[error("slices {deficient:?} hold fewer than {required} observed entries")]
    Assumption1Violated {
        required: usize,
        deficient: Vec<usize>,
    },

    #[error("explicit pivot {0:?} is not an observed entry")]
    ExplicitPivotNotObserved(Vec<usize>),

    #[error("explicit pivots for slice {slice}: expected {expected}, got {got}")]
    PivotCount {
        slice: usize,
        expected: usize,
        got: usize,
    },

    #[error("pivot system of slice {slice} is numerically singular")]
    SingularPivotSystem { slice: usize },

    #[error("selection is not algebraically dependent (rank {rank} = size {size})")]
    PreconditionNotDependent { rank: usize, size: usize },

    #[error("no restart reached the residual tolerance")]
    NoFitFound,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
