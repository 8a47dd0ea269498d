//! Default numerical tolerances.
//!
//! Callers that need different values pass them explicitly; these are the
//! values used when nothing else is specified.

/// Algebraic identities between closed forms (Pauli products, traces, tables).
pub const ALGEBRAIC: f64 = 1e-12;

/// Results that go through the Pauli-vector exponential.
pub const EXPONENTIAL: f64 = 1e-10;

/// Deviation from unit norm accepted for a measurement axis.
pub const UNIT_NORM: f64 = 1e-9;

/// Slack on the Bloch-ball constraint `|u| <= 1`.
pub const BLOCH_BALL: f64 = 1e-12;

/// An entry counts as non-negative if it is at least `-NON_NEGATIVE`.
pub const NON_NEGATIVE: f64 = 1e-12;

/// Completeness and marginal consistency of outcome tables.
pub const TABLE: f64 = 1e-10;

/// Smallest eigenvalue still considered positive semidefinite.
pub const PSD: f64 = 1e-10;
