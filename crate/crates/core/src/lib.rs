//! Quasi-Bell inequalities for a pair of qubits.
//!
//! Classical Bell-type expressions that multiply several spin observables
//! measured on the *same* qubit are quantized by symmetrization: the product
//! `a_0 a_1 ... a_k` becomes the average over all orderings of
//! `(â_0·σ)(â_1·σ)...(â_k·σ)`. For an even number of factors this is a
//! multiple of the identity, for an odd number it is a Pauli vector `a⃗·σ`.
//!
//! The crate is organised bottom-up:
//!
//! * [`pauli`]: 2×2 / 4×4 complex operators, Pauli vectors, Bloch-parameterized
//!   two-qubit states, projectors and the Pauli-vector exponential.
//! * [`joint`]: joint (quasi-)probability tables of two or three noncommuting
//!   observables, positivity intervals and Fréchet-bound checks.
//! * [`symmetrize`]: the symmetrized product by brute-force permutation
//!   averaging, by a perfect-matching sum, and by finite differences of the
//!   characteristic function `exp(i Σ θ_j â_j·σ)`.
//! * [`quasi_bell`]: the order-`N` inequality `K_N = A_N† M_N B_N` with the
//!   scaled Hadamard matrix, exhaustive classical certificates and the singlet
//!   expectation value.
//! * [`optimizer`]: multistart Nelder–Mead maximization of the violation.
//! * [`werner`]: noise-scaled violations and locality thresholds.
//!
//! Everything here is `no_std` (with `alloc`); IO, the command line and
//! parallel restarts live in the `quasibell` crate.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod direction;
pub mod error;
pub mod joint;
pub mod optimizer;
pub mod pauli;
pub mod quasi_bell;
pub mod sampling;
pub mod symmetrize;
pub mod tolerance;
pub mod werner;

pub use direction::Direction;
pub use error::{QuasiBellError, Result};
pub use joint::{CorrelatorSpec, Interval, OutcomeTable};
pub use optimizer::{Ansatz, OptimizationResult, OptimizeConfig};
pub use pauli::{BlochState, Operator2, Operator4, Outcome, SymmetrizedOperator};
pub use quasi_bell::{ClassicalAssignment, FactorSet, QuasiBellInstance};
pub use symmetrize::ProductSpec;
