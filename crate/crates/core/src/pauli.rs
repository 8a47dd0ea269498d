//! Single- and two-qubit operator algebra.
//!
//! Two-qubit operators use Alice's qubit as the left (slow) tensor factor, so
//! `σ_i ⊗ I` acts on Alice and basis index `2·alice + bob` with `|0⟩ = |↑⟩`.

use core::ops::{Add, Mul, Sub};

use nalgebra::{Complex, Matrix2, Matrix4, SymmetricEigen};

use crate::direction::Direction;
use crate::error::Result;

/// Complex number with 64-bit real and imaginary parts.
pub type C64 = Complex<f64>;

const ZERO: C64 = Complex::new(0.0, 0.0);
const ONE: C64 = Complex::new(1.0, 0.0);
const I: C64 = Complex::new(0.0, 1.0);

/// `|z|`.
pub fn modulus(z: &C64) -> f64 {
    libm::hypot(z.re, z.im)
}

/// Outcome of a spin measurement, `+1` or `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Outcome {
    /// Spin up along the measurement axis.
    Plus,
    /// Spin down along the measurement axis.
    Minus,
}

impl Outcome {
    /// Both outcomes, `+1` first.
    pub const BOTH: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }

    /// `Plus` for a non-negative sign, `Minus` otherwise.
    pub fn from_sign(s: f64) -> Self {
        if s >= 0.0 {
            Outcome::Plus
        } else {
            Outcome::Minus
        }
    }
}

/// A 2×2 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Operator2(pub Matrix2<C64>);

/// A 4×4 complex matrix acting on two qubits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Operator4(pub Matrix4<C64>);

/// Coefficients of a 2×2 matrix in the basis `{I, σ1, σ2, σ3}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliComponents {
    /// Coefficient of the identity.
    pub identity: C64,
    /// Coefficients of `σ1, σ2, σ3`.
    pub sigma: [C64; 3],
}

impl Operator2 {
    pub fn zero() -> Self {
        Self(Matrix2::zeros())
    }

    pub fn identity() -> Self {
        Self(Matrix2::identity())
    }

    /// Pauli matrix `σ_{axis+1}` for `axis` in `0..3`.
    ///
    /// # Panics
    /// If `axis >= 3`.
    pub fn sigma(axis: usize) -> Self {
        let m = match axis {
            0 => Matrix2::new(ZERO, ONE, ONE, ZERO),
            1 => Matrix2::new(ZERO, -I, I, ZERO),
            2 => Matrix2::new(ONE, ZERO, ZERO, -ONE),
            _ => panic!("Pauli axis {axis} out of range"),
        };
        Self(m)
    }

    pub fn scale(self, s: C64) -> Self {
        Self(self.0 * s)
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.0 - other.0).iter().map(modulus).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        Self(self.0 * self.0.adjoint()).max_abs_diff(&Self::identity()) <= tol
    }

    /// Decomposes into `c_0 I + Σ c_k σ_k` using `c = Tr[σ_k M] / 2`.
    pub fn pauli_components(&self) -> PauliComponents {
        let m = &self.0;
        let half = 0.5;
        PauliComponents {
            identity: (m[(0, 0)] + m[(1, 1)]) * half,
            sigma: [
                (m[(0, 1)] + m[(1, 0)]) * half,
                // Tr[σ2 M] = i m01 - i m10
                (m[(0, 1)] - m[(1, 0)]) * I * half,
                (m[(0, 0)] - m[(1, 1)]) * half,
            ],
        }
    }

    /// Tensor product `self ⊗ rhs`, `self` acting on the left (Alice's) qubit.
    pub fn kron(&self, rhs: &Operator2) -> Operator4 {
        Operator4(self.0.kronecker(&rhs.0))
    }
}

impl Add for Operator2 {
    type Output = Operator2;
    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl Sub for Operator2 {
    type Output = Operator2;
    fn sub(self, rhs: Self) -> Self {
        Self(self.0 - rhs.0)
    }
}

impl Mul for Operator2 {
    type Output = Operator2;
    fn mul(self, rhs: Self) -> Self {
        Self(self.0 * rhs.0)
    }
}

impl Operator4 {
    pub fn identity() -> Self {
        Self(Matrix4::identity())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.0 - other.0).iter().map(modulus).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&Self(self.0.adjoint())) <= tol
    }

    /// Eigenvalues in ascending order. Only meaningful for Hermitian input.
    pub fn hermitian_eigenvalues(&self) -> [f64; 4] {
        let eig = SymmetricEigen::new(self.0);
        let mut ev = [0.0; 4];
        for (slot, v) in ev.iter_mut().zip(eig.eigenvalues.iter()) {
            *slot = *v;
        }
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// `Tr[self · rhs]`.
    pub fn trace_product(&self, rhs: &Operator4) -> C64 {
        (self.0 * rhs.0).trace()
    }
}

impl Add for Operator4 {
    type Output = Operator4;
    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl Mul for Operator4 {
    type Output = Operator4;
    fn mul(self, rhs: Self) -> Self {
        Self(self.0 * rhs.0)
    }
}

/// `d·σ = d.x σ1 + d.y σ2 + d.z σ3`. Any norm is accepted.
pub fn pauli_dot(d: Direction) -> Operator2 {
    let (x, y, z) = (Complex::from(d.x), Complex::from(d.y), Complex::from(d.z));
    Operator2(Matrix2::new(z, x - I * y, x + I * y, -z))
}

/// Spin projector `½(I + s d·σ)` onto outcome `s` along the unit axis `d`.
pub fn projector(d: Direction, outcome: Outcome) -> Result<Operator2> {
    d.require_unit()?;
    let s = Complex::from(0.5 * outcome.sign());
    Ok(Operator2(
        Matrix2::identity() * Complex::from(0.5) + pauli_dot(d).0 * s,
    ))
}

/// `exp(i h)` for Hermitian `h`.
///
/// Writes `h = c I + χ⃗·σ` and uses `exp(i χ⃗·σ) = cos χ I + i (sin χ / χ) χ⃗·σ`.
/// Anti-Hermitian parts of `h` are discarded.
pub fn matrix_exp_i(h: &Operator2) -> Operator2 {
    let c = h.pauli_components();
    let chi = Direction::new(c.sigma[0].re, c.sigma[1].re, c.sigma[2].re);
    let angle = chi.norm();
    let sinc = if angle < 1e-4 {
        1.0 - angle * angle / 6.0
    } else {
        libm::sin(angle) / angle
    };
    let phase = Complex::new(libm::cos(c.identity.re), libm::sin(c.identity.re));
    let body =
        Matrix2::identity() * Complex::from(libm::cos(angle)) + pauli_dot(chi).0 * (I * sinc);
    Operator2(body * phase)
}

/// Two-qubit state in Bloch form:
/// `ρ = ¼(I⊗I + Σ u_i σ_i⊗I + Σ v_j I⊗σ_j + Σ R_ij σ_i⊗σ_j)`.
///
/// Positivity is not enforced; see [`BlochState::is_physical`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BlochState {
    /// Alice's Bloch vector.
    pub u: Direction,
    /// Bob's Bloch vector.
    pub v: Direction,
    /// Correlation matrix `R_ij = ⟨σ_i ⊗ σ_j⟩`.
    pub r: [[f64; 3]; 3],
}

impl BlochState {
    pub fn new(u: Direction, v: Direction, r: [[f64; 3]; 3]) -> Self {
        Self { u, v, r }
    }

    /// The singlet `(|↑↓⟩ - |↓↑⟩)/√2`: `u = v = 0`, `R = -I`.
    pub fn singlet() -> Self {
        Self::werner(1.0)
    }

    /// `I/4`.
    pub fn maximally_mixed() -> Self {
        Self::werner(0.0)
    }

    /// Werner state `(1-z) I/4 + z |ψ⟩⟨ψ|`: `R = -z I`.
    pub fn werner(z: f64) -> Self {
        let mut r = [[0.0; 3]; 3];
        for (i, row) in r.iter_mut().enumerate() {
            row[i] = -z;
        }
        Self::new(Direction::ZERO, Direction::ZERO, r)
    }

    /// `â† R b̂`.
    pub fn correlation(&self, a: Direction, b: Direction) -> f64 {
        let a = a.to_array();
        let b = b.to_array();
        a.iter()
            .zip(&self.r)
            .map(|(ai, row)| ai * row.iter().zip(&b).map(|(r, bj)| r * bj).sum::<f64>())
            .sum()
    }

    /// The 4×4 density matrix.
    pub fn density_matrix(&self) -> Operator4 {
        let id = Operator2::identity();
        let u = self.u.to_array();
        let v = self.v.to_array();
        let mut rho = id.kron(&id);
        for i in 0..3 {
            let si = Operator2::sigma(i);
            rho = rho + si.kron(&id).scaled(u[i]) + id.kron(&si).scaled(v[i]);
            for j in 0..3 {
                rho = rho + si.kron(&Operator2::sigma(j)).scaled(self.r[i][j]);
            }
        }
        rho.scaled(0.25)
    }

    /// Smallest eigenvalue of the density matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        self.density_matrix().hermitian_eigenvalues()[0]
    }

    /// Whether the density matrix is positive semidefinite within
    /// [`crate::tolerance::PSD`].
    pub fn is_physical(&self) -> bool {
        self.min_eigenvalue() >= -crate::tolerance::PSD
    }
}

impl Operator4 {
    fn scaled(self, s: f64) -> Self {
        Self(self.0 * Complex::from(s))
    }
}

/// `⟨(a·σ)⊗(b·σ)⟩` in the singlet, `-a·b`. Bilinear, so any norms are accepted.
pub fn singlet_pair_expectation(a: Direction, b: Direction) -> f64 {
    -a.dot(b)
}

/// `scalar·I + vector·σ`, the form every symmetrized product of spin
/// observables takes.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SymmetrizedOperator {
    /// Coefficient of the identity.
    pub scalar: f64,
    /// Coefficients of `σ1, σ2, σ3`.
    pub vector: Direction,
}

impl SymmetrizedOperator {
    pub fn scalar(scalar: f64) -> Self {
        Self {
            scalar,
            vector: Direction::ZERO,
        }
    }

    pub fn vector(vector: Direction) -> Self {
        Self {
            scalar: 0.0,
            vector,
        }
    }

    /// Real parts of the Pauli components of `m`, together with the largest
    /// imaginary part that was dropped.
    pub fn from_operator(m: &Operator2) -> (Self, f64) {
        let c = m.pauli_components();
        let imag = c
            .sigma
            .iter()
            .chain(core::iter::once(&c.identity))
            .map(|z| z.im.abs())
            .fold(0.0, f64::max);
        let op = Self {
            scalar: c.identity.re,
            vector: Direction::new(c.sigma[0].re, c.sigma[1].re, c.sigma[2].re),
        };
        (op, imag)
    }

    pub fn to_operator(&self) -> Operator2 {
        Operator2(Matrix2::identity() * Complex::from(self.scalar) + pauli_dot(self.vector).0)
    }

    /// `Tr[ρ_A S]` with `ρ_A = ½(I + u·σ)`.
    pub fn expectation(&self, u: Direction) -> f64 {
        self.scalar + self.vector.dot(u)
    }

    /// Largest absolute difference over the four real coefficients.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.scalar - other.scalar)
            .abs()
            .max(self.vector.max_abs_diff(other.vector))
    }
}
