use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("weights {0} and {1} are neither identical nor separated (gap {2:.3e} at x = {3})")]
    NonSeparated(usize, usize, f64, f64),
    #[error("weight {index} changes sign near x = {x}")]
    SignChange { index: usize, x: f64 },
    #[error("weight {index} vanishes")]
    ZeroWeight { index: usize },
    #[error("index {index} out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("x = {x} outside [0, {ell}]")]
    XOutOfDomain { x: f64, ell: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("boundary block (C D) has rank {rank} < {n}")]
    RankDeficientPair { rank: usize, n: usize },
    #[error("step limit exceeded at x = {x}")]
    StepLimitExceeded { x: f64 },
    #[error("non-finite value at x = {x}")]
    NonFiniteValue { x: f64 },
    #[error("potential entry ({0}, {1}) lies in a block of equal weights but is not zero")]
    BlockDiagonalityViolated(usize, usize),
    #[error("minor orders differ: {0} vs {1}")]
    OrderMismatch(usize, usize),
    #[error("boundary conditions are not regular")]
    NotRegular,
    #[error("boundary pair is not in canonical form")]
    NotCanonical,
    #[error("exponential polynomial needs at least two terms")]
    InsufficientTerms,
    #[error("winding number {counted} but {found} zeros refined")]
    WindingMismatch { counted: i64, found: usize },
    #[error("contour passes through a zero after {0} retries")]
    ContourThroughZero(usize),
    #[error("not an eigenvalue: relative residual {0:.3e}")]
    NotAnEigenvalue(f64),
    #[error("sign pattern b_(2k-1) < 0 < b_(2k) violated at pair {0}")]
    SignPatternViolated(usize),
    #[error("weights {0} and {1} coincide")]
    EqualWeights(usize, usize),
    #[error("no convergence after {iterations} iterations (last change {change:.3e})")]
    NoConvergence { iterations: usize, change: f64 },
    #[error("kernel column {0} missing")]
    KernelMissing(usize),
    #[error("grid or profile mismatch")]
    GridMismatch,
    #[error("not a simple zero: |derivative| = {0:.3e}")]
    NotSimpleZero(f64),
    #[error("pairing value {0:.3e} too small")]
    DegeneratePairing(f64),
    #[error("wave speeds are neither identical nor separated")]
    SpeedSeparationUnknown,
    #[error("wave speeds are not identical")]
    SpeedsNotEqual,
    #[error("no asymptotic regime applies: {0}")]
    RegimeUndetermined(String),
    #[error("regularity violated: J+ = {0:.3e}, J- = {1:.3e}")]
    RegularityViolated(f64, f64),
    #[error("spectra counts differ in the shared window: {0} vs {1}")]
    CountMismatch(usize, usize),
    #[error("integration failure: {0}")]
    IntegrationFailure(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    /// Input or invariant problems, as opposed to numerical failures.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::NonSeparated(..)
                | Error::SignChange { .. }
                | Error::ZeroWeight { .. }
                | Error::IndexOutOfRange { .. }
                | Error::XOutOfDomain { .. }
                | Error::DimensionMismatch { .. }
                | Error::RankDeficientPair { .. }
                | Error::BlockDiagonalityViolated(..)
                | Error::SignPatternViolated(..)
                | Error::Parse(_)
                | Error::Invalid(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
