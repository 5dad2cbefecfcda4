//! Error type shared by every module of the crate.

/// Errors raised by simplex construction, cone measurement, partition
/// refinement and the optimizer.
#[derive(Clone, Debug, thiserror::Error, PartialEq)]
pub enum Error {
    /// Points of different dimensions were combined.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch {
        /// Dimension established by the first point.
        expected: usize,
        /// Offending dimension.
        found: usize,
    },

    /// Vertices do not span a full-dimensional simplex.
    #[error("degenerate simplex: volume {volume:e} is not above threshold {threshold:e}")]
    DegenerateSimplex {
        /// Computed volume.
        volume: f64,
        /// Scale-relative degeneracy threshold.
        threshold: f64,
    },

    /// The dimension is below 2.
    #[error("unsupported dimension {0}: dimension must satisfy d >= 2")]
    UnsupportedDimension(usize),

    /// A coordinate was NaN or infinite.
    #[error("non-finite coordinate in point")]
    NonFiniteCoordinate,

    /// Wrong number of vertices (or vertex values) for the dimension.
    #[error("arity error: expected {expected} entries, found {found}")]
    ArityError {
        /// Required count, d + 1.
        expected: usize,
        /// Supplied count.
        found: usize,
    },

    #[error("point lies outside the simplex")]
    PointOutsideSimplex,

    #[error("point lies outside the partition domain")]
    PointOutsideDomain,

    /// Regularity constant must be positive.
    #[error("invalid eta {0}: eta must be > 0")]
    InvalidEta(f64),

    #[error("partition has no leaves")]
    EmptyPartition,

    /// Evaluation budget cannot cover the root vertices.
    #[error("budget {budget} too small: need at least {required} evaluations")]
    BudgetTooSmall {
        /// Supplied budget.
        budget: usize,
        /// Minimum budget, (d + 1) per root.
        required: usize,
    },

    /// A numeric argument violated its documented range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A serialized partition is structurally inconsistent.
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
