use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("spline order must be at least 1, got {0}")]
    InvalidOrder(usize),
    #[error("knot sequence is empty")]
    EmptyKnots,
    #[error("knot {index} is not finite")]
    NonFiniteKnot { index: usize },
    #[error("MultiplicityViolation: knot {index} equals knot {index}+k (multiplicity exceeds the order)")]
    MultiplicityViolation { index: isize },
    #[error("NotSorted: knot {index} is larger than its successor")]
    NotSorted { index: usize },
    #[error("TooFewKnots: {got} knots supplied, at least {needed} required")]
    TooFewKnots { got: usize, needed: usize },
    #[error("OutOfRange: periodic knot {index} = {value} lies outside [0, 1)")]
    OutOfRange { index: usize, value: f64 },
    #[error("NotClamped: the {end} boundary knot does not have multiplicity k")]
    NotClamped { end: &'static str },
    #[error("IndexOutOfRange: index {index} not in {lo}..={hi}")]
    IndexOutOfRange { index: isize, lo: isize, hi: isize },
    #[error("DomainViolation: point {x} outside [{lo}, {hi}]")]
    DomainViolation { x: f64, lo: f64, hi: f64 },
    #[error("EmptySet: index distance of an empty set")]
    EmptySet,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("NotPositiveDefinite: pivot {pivot} at row {row} below tolerance {tol}")]
    NotPositiveDefinite { row: usize, pivot: f64, tol: f64 },
    #[error("DimensionTooLarge: dense inverse of dimension {dim} exceeds limit {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },
    #[error("NonFiniteSample: integrand is not finite at x = {x}")]
    NonFiniteSample { x: f64 },
    #[error("WindowTooSmall: {0}")]
    WindowTooSmall(String),
    #[error("DegenerateFit: only {distinct} distinct distances above the noise floor (need 3)")]
    DegenerateFit { distinct: usize },
    #[error("EmptyCell: knot interval {index} has zero length")]
    EmptyCell { index: usize },
    #[error("knot file line {line}: {msg}")]
    KnotFile { line: usize, msg: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Failures of the numerics proper, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite { .. }
                | Error::NonFiniteSample { .. }
                | Error::DegenerateFit { .. }
                | Error::DimensionTooLarge { .. }
        )
    }
}
