use thiserror::Error;

/// Errors raised by the quasi-Bell numerics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuasiBellError {
    /// A measurement axis that must be a unit vector is not.
    #[error("direction must be a unit vector, got norm {norm}")]
    NonUnitDirection {
        /// Euclidean norm of the offending direction.
        norm: f64,
    },
    /// A single-qubit Bloch vector lies outside the unit ball.
    #[error("Bloch vector must satisfy |u| <= 1, got |u| = {norm}")]
    BlochOutOfBall {
        /// Euclidean norm of the Bloch vector.
        norm: f64,
    },
    /// A scalar parameter lies outside its admissible range.
    #[error("{what} = {value} is outside [{lo}, {hi}]")]
    OutOfRange {
        /// Parameter name.
        what: &'static str,
        /// Offending value.
        value: f64,
        /// Lower admissible bound.
        lo: f64,
        /// Upper admissible bound.
        hi: f64,
    },
    /// An outcome table had the wrong number of observables.
    #[error("expected a table over {expected} observables, got {found}")]
    WrongArity {
        /// Required arity.
        expected: usize,
        /// Arity of the table passed in.
        found: usize,
    },
    /// Pair tables do not match the two-observable marginals of a triple table.
    #[error("pair table {pair} disagrees with the triple-table marginal by {residual}")]
    InconsistentMarginals {
        /// Index of the offending pair table.
        pair: usize,
        /// Largest absolute entry mismatch.
        residual: f64,
    },
    /// Brute-force symmetrization was asked for more factors than the guard allows.
    #[error("{k} factors exceeds the limit of {limit}")]
    TooManyFactors {
        /// Requested number of factors.
        k: usize,
        /// Active limit.
        limit: usize,
    },
    /// Finite-difference step outside `(0, 0.1]`.
    #[error("finite-difference step {step} is outside (0, 0.1]")]
    StepOutOfRange {
        /// Offending step.
        step: f64,
    },
    /// A product index outside `[0, 2^N)`.
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange {
        /// Offending index.
        index: usize,
        /// Number of valid indices.
        len: usize,
    },
    /// Exhaustive enumeration would exceed the configured cap.
    #[error("enumeration needs {required} assignments, cap is {cap}")]
    EnumerationTooLarge {
        /// Number of assignments required.
        required: u64,
        /// Active cap.
        cap: u64,
    },
    /// The instance does not violate the classical bound, so no Werner threshold exists.
    #[error("|quantum value| = {value} does not exceed the classical bound 1")]
    NoViolation {
        /// Absolute quantum value of the instance.
        value: f64,
    },
    /// Collections whose lengths must agree do not.
    #[error("expected {expected} {what}, got {found}")]
    LengthMismatch {
        /// What was being counted.
        what: &'static str,
        /// Required count.
        expected: usize,
        /// Count supplied.
        found: usize,
    },
}

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, QuasiBellError>;
