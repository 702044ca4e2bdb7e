use thiserror::Error;

/// Errors raised by constructors and operations across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:e})")]
    NotPsd { min_eig: f64 },
    #[error("malformed group table: {0}")]
    MalformedTable(String),
    #[error("elements {0} and {1} are not comparable in the semigroup order")]
    NotAChain(i64, i64),
    #[error("invalid element {0}")]
    InvalidElement(i64),
    #[error("missing kernel for semigroup element {0}")]
    MissingElement(i64),
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("weights are not a probability distribution: {0}")]
    NotADistribution(String),
    #[error("times are not strictly increasing")]
    UnsortedTimes,
    #[error("negative times need a nu-symmetric kernel family")]
    TwoSidedNeedsSymmetry,
    #[error("window too large: {entries} tensor entries exceed the cap of {cap}")]
    WindowTooLarge { entries: usize, cap: usize },
    #[error("window times must be the symmetric integer range -L..=L")]
    WindowNotSymmetric,
    #[error("space is not reflection positive (min eigenvalue {min_eig:e})")]
    NotReflectionPositive { min_eig: f64 },
    #[error("operator does not map E+ into itself (residual {residual:e})")]
    SubspaceNotInvariant { residual: f64 },
    #[error("operator does not preserve the null space (residual {residual:e})")]
    NullSpaceNotInvariant { residual: f64 },
    #[error("Markov-type subspace E0 required")]
    MarkovTypeRequired,
    #[error("invalid subspace: {0}")]
    InvalidSubspace(String),
    #[error("reference measure is not invariant under the semigroup (deviation {deviation:e})")]
    InvarianceViolated { deviation: f64 },
    #[error("convolution semigroup is not symmetric")]
    NotSymmetric,
    #[error("element {0} does not square to the identity")]
    NotAnInvolution(i64),
    #[error("group mismatch: orders {0} and {1}")]
    GroupMismatch(usize, usize),
    #[error("operator norm {norm} exceeds 1")]
    NotAContraction { norm: f64 },
    #[error("representation is not involutive: deviation {deviation:e}")]
    NotInvolutive { deviation: f64 },
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("nonpositive weight: {0}")]
    NonPositiveWeight(String),
    #[error("invalid representation: {0}")]
    InvalidRepresentation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
