use thiserror::Error;

/// Errors produced by the fitting, kernel and evaluation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty dataset")]
    EmptyDataset,

    #[error("non-finite entry at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("dataset must be centered")]
    NotCentered,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("invalid component count {requested} (must be in 1..={max})")]
    InvalidComponentCount { requested: usize, max: usize },

    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("background covariance singular; supply ridge (pivot {pivot})")]
    SingularBackground { pivot: usize },

    #[error("eigensolver did not converge for eigenvalue {index}")]
    NoConvergence { index: usize },

    #[error("weights must be nonnegative")]
    NegativeWeight,

    #[error("weights must sum to 1 (sum = {sum})")]
    WeightSum { sum: f64 },

    #[error("expected {expected} weights, found {found}")]
    WeightCount { expected: usize, found: usize },

    #[error("at least one background dataset is required")]
    NoBackgrounds,

    #[error("epsilon must be positive (got {0})")]
    NonPositiveEpsilon(f64),

    #[error("alpha must be nonnegative (got {0})")]
    NegativeAlpha(f64),

    #[error("ridge must be nonnegative (got {0})")]
    NegativeRidge(f64),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("non-finite kernel value at ({row}, {col})")]
    NonFiniteKernel { row: usize, col: usize },

    #[error("invalid generator parameters: {0}")]
    InvalidSpec(String),

    #[error("eigenvalue-ratio gap condition violated: {0}")]
    GapViolated(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("cluster count {k} exceeds number of points {points}")]
    TooManyClusters { k: usize, points: usize },

    #[error("cluster count must be at least 1")]
    ZeroClusters,

    #[error("cluster {0} is empty")]
    EmptyCluster(usize),

    #[error("block selector out of range: background {index} of {count}")]
    InvalidBlock { index: usize, count: usize },
}

impl Error {
    /// True for failures caused by the numerics (singular or indefinite
    /// matrices, non-convergence) rather than by malformed inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite { .. }
                | Error::SingularBackground { .. }
                | Error::NoConvergence { .. }
                | Error::NonFiniteKernel { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
