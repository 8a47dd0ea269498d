//! Quantization of products of spin observables on one qubit.
//!
//! The classical product `a_0 a_1 ... a_{k-1}` maps to the average over all
//! `k!` orderings of `(â_0·σ)...(â_{k-1}·σ)`. Three independent evaluations are
//! provided:
//!
//! * [`symmetrize_bruteforce`] multiplies out every permutation;
//! * [`symmetrize_pairing`] sums over perfect matchings of the Gram matrix,
//!   which is what the permutation average collapses to;
//! * [`moyal_product_operator`] differentiates `exp(i Σ θ_j â_j·σ)` once in
//!   every `θ_j` at the origin by central finite differences.
//!
//! For even `k` the result is `scalar·I`, for odd `k` it is `vector·σ`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::Complex;

use crate::direction::Direction;
use crate::error::{QuasiBellError, Result};
use crate::joint::{noncommuting_pair_table, CorrelatorSpec, OutcomeTable};
use crate::pauli::{matrix_exp_i, pauli_dot, projector, Operator2, SymmetrizedOperator, C64};

/// Largest `k` accepted by [`symmetrize_bruteforce`] without the override.
pub const BRUTE_FORCE_LIMIT: usize = 9;

/// Largest number of directions [`MatchingSums`] tabulates (`2^k` entries).
pub const PAIRING_LIMIT: usize = 20;

/// Largest `k` accepted by [`moyal_product_operator`] (`2^k`-point stencil).
pub const MOYAL_LIMIT: usize = 6;

/// Default finite-difference step for [`moyal_product_operator`].
pub const DEFAULT_MOYAL_STEP: f64 = 5e-3;

/// An ordered list of unit measurement axes whose outcomes are multiplied.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProductSpec {
    directions: Vec<Direction>,
}

impl ProductSpec {
    pub fn new(directions: Vec<Direction>) -> Result<Self> {
        if directions.is_empty() {
            return Err(QuasiBellError::LengthMismatch {
                what: "directions",
                expected: 1,
                found: 0,
            });
        }
        for d in &directions {
            d.require_unit()?;
        }
        Ok(Self { directions })
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    /// Number of factors.
    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }
}

/// `k!! = k (k-2) (k-4) ...`, with `0!! = (-1)!! = 1`.
pub fn double_factorial(k: usize) -> f64 {
    let mut r = 1.0;
    let mut j = k;
    while j > 1 {
        r *= j as f64;
        j -= 2;
    }
    r
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|j| j as f64).product()
}

/// `(1/k!) Σ_π ∏_j (â_{π(j)}·σ)` as a matrix.
///
/// Errors with [`QuasiBellError::TooManyFactors`] above [`BRUTE_FORCE_LIMIT`]
/// unless `allow_large` is set.
pub fn permutation_average(p: &ProductSpec, allow_large: bool) -> Result<Operator2> {
    let k = p.len();
    if k > BRUTE_FORCE_LIMIT && !allow_large {
        return Err(QuasiBellError::TooManyFactors {
            k,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let ops: Vec<Operator2> = p.directions.iter().map(|d| pauli_dot(*d)).collect();
    let product = |order: &[usize]| {
        order
            .iter()
            .fold(Operator2::identity(), |acc, &j| acc * ops[j])
    };

    // Heap's algorithm
    let mut order: Vec<usize> = (0..k).collect();
    let mut counters = vec![0usize; k];
    let mut sum = product(&order);
    let mut i = 1;
    while i < k {
        if counters[i] < i {
            if i % 2 == 0 {
                order.swap(0, i);
            } else {
                order.swap(counters[i], i);
            }
            sum = sum + product(&order);
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    Ok(sum.scale(Complex::from(1.0 / factorial(k))))
}

/// Symmetrized product by explicit averaging over all `k!` orderings.
pub fn symmetrize_bruteforce(p: &ProductSpec, allow_large: bool) -> Result<SymmetrizedOperator> {
    let m = permutation_average(p, allow_large)?;
    Ok(SymmetrizedOperator::from_operator(&m).0)
}

/// `a0 a1 → ½{â0·σ, â1·σ} = (â0·â1) I`.
pub fn symmetrize_pair(a0: Direction, a1: Direction) -> Result<SymmetrizedOperator> {
    a0.require_unit()?;
    a1.require_unit()?;
    Ok(SymmetrizedOperator::scalar(a0.dot(a1)))
}

/// `a0 a1 a2 → a⃗_012·σ` with
/// `a⃗_012 = ⅓[(â1·â2) â0 + (â2·â0) â1 + (â0·â1) â2]`.
pub fn symmetrize_triple(
    a0: Direction,
    a1: Direction,
    a2: Direction,
) -> Result<SymmetrizedOperator> {
    for d in [a0, a1, a2] {
        d.require_unit()?;
    }
    let v = (a0 * a1.dot(a2) + a1 * a2.dot(a0) + a2 * a0.dot(a1)) * (1.0 / 3.0);
    Ok(SymmetrizedOperator::vector(v))
}

/// Perfect-matching sums `f(S) = Σ_{matchings of S} ∏ (â_i·â_j)` for every
/// subset `S` of a direction list, tabulated once.
///
/// Every symmetrized sub-product then costs `O(|S|)`:
/// odd `|S|` gives `a⃗_S = (1/|S|!!) Σ_{u∈S} f(S∖u) â_u`, even `|S|` gives
/// `(1/(|S|-1)!!) f(S)`.
#[derive(Debug, Clone)]
pub struct MatchingSums {
    directions: Vec<Direction>,
    sums: Vec<f64>,
}

impl MatchingSums {
    /// Tabulates all `2^k` subsets. Fails above [`PAIRING_LIMIT`] directions.
    pub fn new(directions: &[Direction]) -> Result<Self> {
        let k = directions.len();
        if k > PAIRING_LIMIT {
            return Err(QuasiBellError::TooManyFactors {
                k,
                limit: PAIRING_LIMIT,
            });
        }
        let gram: Vec<f64> = directions
            .iter()
            .flat_map(|a| directions.iter().map(move |b| a.dot(*b)))
            .collect();
        let mut sums = vec![0.0; 1 << k];
        sums[0] = 1.0;
        for mask in 1usize..(1 << k) {
            if mask.count_ones() % 2 == 1 {
                continue;
            }
            let low = mask.trailing_zeros() as usize;
            let rest = mask & !(1 << low);
            let mut s = 0.0;
            let mut bits = rest;
            while bits != 0 {
                let j = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                s += gram[low * k + j] * sums[rest & !(1 << j)];
            }
            sums[mask] = s;
        }
        Ok(Self {
            directions: directions.to_vec(),
            sums,
        })
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// Sum over perfect matchings of the subset `mask` (0 for odd subsets).
    pub fn matching_sum(&self, mask: usize) -> f64 {
        if mask.count_ones() % 2 == 1 {
            0.0
        } else {
            self.sums[mask]
        }
    }

    /// Symmetrized product of the directions selected by `mask`.
    pub fn symmetrized(&self, mask: usize) -> SymmetrizedOperator {
        let size = mask.count_ones() as usize;
        if size.is_multiple_of(2) {
            return SymmetrizedOperator::scalar(
                self.sums[mask] / double_factorial(size.saturating_sub(1)),
            );
        }
        let mut v = Direction::ZERO;
        let mut bits = mask;
        while bits != 0 {
            let u = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            v = v + self.directions[u] * self.sums[mask & !(1 << u)];
        }
        SymmetrizedOperator::vector(v * (1.0 / double_factorial(size)))
    }
}

/// Symmetrized product through perfect-matching sums; agrees with
/// [`symmetrize_bruteforce`] but costs `O(k 2^k)` instead of `O(k·k!)`.
pub fn symmetrize_pairing(p: &ProductSpec) -> Result<SymmetrizedOperator> {
    let sums = MatchingSums::new(&p.directions)?;
    Ok(sums.symmetrized((1 << p.len()) - 1))
}

/// Output of [`moyal_product_operator`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoyalProduct {
    /// Hermitian part decomposed as `scalar·I + vector·σ`.
    pub operator: SymmetrizedOperator,
    /// The raw finite-difference matrix.
    pub matrix: Operator2,
    /// Largest imaginary Pauli coefficient, which should vanish.
    pub imaginary_residual: f64,
}

/// Central-difference estimate of `∂^k/∂θ_0…∂θ_{k-1} exp(i χ⃗·σ)` at the
/// origin, `χ⃗ = Σ θ_j â_j`, before dividing by `i^k`.
fn mixed_partial(ops: &[Operator2], h: f64) -> Operator2 {
    let k = ops.len();
    let mut acc = Operator2::zero();
    for signs in 0usize..(1 << k) {
        let mut gen = Operator2::zero();
        let mut parity = 1.0;
        for (j, op) in ops.iter().enumerate() {
            let s = if signs >> j & 1 == 1 { -1.0 } else { 1.0 };
            parity *= s;
            gen = gen + op.scale(Complex::from(s * h));
        }
        acc = acc + matrix_exp_i(&gen).scale(Complex::from(parity));
    }
    acc.scale(Complex::from(1.0 / libm::pow(2.0 * h, k as f64)))
}

/// Operator whose expectation is the `k`-th joint moment of the quantized
/// characteristic function `⟨exp(i Σ θ_j â_j·σ)⟩`:
/// `∂^k / (i^k ∂θ_0…∂θ_{k-1}) exp(i Σ θ_j â_j·σ)` at `θ = 0`.
///
/// Uses the `2^k`-point central-difference stencil at steps `h` and `h/2`
/// combined by Richardson extrapolation, so the truncation error is `O(h^4)`.
pub fn moyal_product_operator(p: &ProductSpec, step: f64) -> Result<MoyalProduct> {
    if !(step > 0.0 && step <= 0.1) {
        return Err(QuasiBellError::StepOutOfRange { step });
    }
    let k = p.len();
    if k > MOYAL_LIMIT {
        return Err(QuasiBellError::TooManyFactors {
            k,
            limit: MOYAL_LIMIT,
        });
    }
    let ops: Vec<Operator2> = p.directions.iter().map(|d| pauli_dot(*d)).collect();
    let coarse = mixed_partial(&ops, step);
    let fine = mixed_partial(&ops, step / 2.0);
    let extrapolated = (fine.scale(Complex::from(4.0)) - coarse).scale(Complex::from(1.0 / 3.0));
    // 1 / i^k = (-i)^k
    let inv_ik = (0..k).fold(Complex::new(1.0, 0.0), |acc: C64, _| {
        acc * Complex::new(0.0, -1.0)
    });
    let matrix = extrapolated.scale(inv_ik);
    let (operator, imaginary_residual) = SymmetrizedOperator::from_operator(&matrix);
    Ok(MoyalProduct {
        operator,
        matrix,
        imaginary_residual,
    })
}

/// `⟨a_0…a_{k-1}⟩ = Tr[ρ_A S] = scalar + vector·u` with `ρ_A = ½(I + u·σ)`.
pub fn product_expectation(p: &ProductSpec, u: Direction) -> Result<f64> {
    u.require_in_ball()?;
    Ok(symmetrize_pairing(p)?.expectation(u))
}

/// Joint quasi-probability implied by symmetrization,
/// `¼(1 + a0 â0·u + a1 â1·u + a0 a1 â0·â1)`. Can be negative.
pub fn symmetrized_pair_joint_table(
    u: Direction,
    a0: Direction,
    a1: Direction,
) -> Result<OutcomeTable> {
    let c = symmetrize_pair(a0, a1)?.scalar;
    noncommuting_pair_table(u, a0, a1, &CorrelatorSpec::pair(c))
}

/// [`symmetrized_pair_joint_table`] computed as `Tr[ρ_A ½{P_a0(â0), P_a1(â1)}]`.
pub fn symmetrized_pair_joint_table_by_trace(
    u: Direction,
    a0: Direction,
    a1: Direction,
) -> Result<OutcomeTable> {
    u.require_in_ball()?;
    let rho = SymmetrizedOperator {
        scalar: 0.5,
        vector: u * 0.5,
    }
    .to_operator();
    let mut entries = Vec::with_capacity(4);
    for k in 0..4 {
        let t = OutcomeTable::outcomes_at(2, k);
        let (p0, p1) = (projector(a0, t[0])?, projector(a1, t[1])?);
        let anti = (p0 * p1 + p1 * p0).scale(Complex::from(0.5));
        entries.push((rho * anti).trace().re);
    }
    Ok(OutcomeTable {
        arity: 2,
        entries,
        directions: vec![a0, a1],
        bloch_u: u,
        correlators: Some(CorrelatorSpec::pair(a0.dot(a1))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Outcome;
    use crate::sampling::{random_in_ball, random_unit, seeded_rng};
    use core::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

    fn spec(d: &[Direction]) -> ProductSpec {
        ProductSpec::new(d.to_vec()).unwrap()
    }

    fn hex() -> [Direction; 3] {
        let h = 3f64.sqrt() / 2.0;
        [
            Direction::X,
            Direction::new(0.5, h, 0.0),
            Direction::new(0.5, -h, 0.0),
        ]
    }

    #[test]
    fn double_factorials() {
        let got: Vec<f64> = (0..8).map(double_factorial).collect();
        assert_eq!(got, vec![1.0, 1.0, 2.0, 3.0, 8.0, 15.0, 48.0, 105.0]);
    }

    #[test]
    fn bruteforce_pair_examples() {
        let s = symmetrize_bruteforce(&spec(&[Direction::X, Direction::Y]), false).unwrap();
        assert!(s.max_abs_diff(&SymmetrizedOperator::default()) < 1e-15);
        let d = Direction::new(0.0, 0.6, 0.8);
        let s = symmetrize_bruteforce(&spec(&[d, d]), false).unwrap();
        assert!(s.max_abs_diff(&SymmetrizedOperator::scalar(1.0)) < 1e-15);
    }

    #[test]
    fn bruteforce_triple_vanishes_on_hexagonal_set() {
        let [a0, a1, a2] = hex();
        let s = symmetrize_bruteforce(&spec(&[a0, a1, a2]), false).unwrap();
        assert!(s.max_abs_diff(&SymmetrizedOperator::default()) < 1e-15);
        // and equals (−â0 + â1 + â2)/6 term by term
        let expect = (-a0 + a1 + a2) * (1.0 / 6.0);
        assert!(s.vector.max_abs_diff(expect) < 1e-15);
    }

    #[test]
    fn bruteforce_guard() {
        let many = vec![Direction::Z; BRUTE_FORCE_LIMIT + 1];
        let p = spec(&many);
        assert!(matches!(
            symmetrize_bruteforce(&p, false),
            Err(QuasiBellError::TooManyFactors { k: 10, limit: 9 })
        ));
        // parallel axes commute: the plain product
        let s = symmetrize_bruteforce(&p, true).unwrap();
        assert!(s.max_abs_diff(&SymmetrizedOperator::scalar(1.0)) < 1e-12);
    }

    #[test]
    fn pair_closed_form() {
        assert_eq!(
            symmetrize_pair(Direction::X, Direction::Z).unwrap().scalar,
            0.0
        );
        assert_eq!(
            symmetrize_pair(Direction::Y, Direction::Y).unwrap().scalar,
            1.0
        );
        let b = Direction::new(0.5, 3f64.sqrt() / 2.0, 0.0);
        assert!((symmetrize_pair(Direction::X, b).unwrap().scalar - 0.5).abs() < 1e-15);
        assert!(symmetrize_pair(Direction::X, Direction::new(2.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn triple_closed_form() {
        let z = Direction::Z;
        assert_eq!(symmetrize_triple(z, z, z).unwrap().vector, z);
        let [a0, a1, a2] = hex();
        assert!(symmetrize_triple(a0, a1, a2).unwrap().vector.norm() < 1e-15);
        assert!(
            symmetrize_triple(Direction::X, Direction::Y, Direction::Z)
                .unwrap()
                .vector
                .norm()
                < 1e-15
        );
    }

    #[test]
    fn triple_is_permutation_invariant_and_bounded() {
        let mut rng = seeded_rng(21, 0);
        for _ in 0..200 {
            let d = [
                random_unit(&mut rng),
                random_unit(&mut rng),
                random_unit(&mut rng),
            ];
            let base = symmetrize_triple(d[0], d[1], d[2]).unwrap();
            assert!(base.vector.norm() <= 1.0 + 1e-12);
            for perm in [[0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
                let s = symmetrize_triple(d[perm[0]], d[perm[1]], d[perm[2]]).unwrap();
                assert!(s.max_abs_diff(&base) < 1e-12);
            }
        }
    }

    #[test]
    fn pairing_reduces_to_closed_forms() {
        let mut rng = seeded_rng(22, 0);
        for _ in 0..50 {
            let (a, b, c) = (
                random_unit(&mut rng),
                random_unit(&mut rng),
                random_unit(&mut rng),
            );
            let p2 = symmetrize_pairing(&spec(&[a, b])).unwrap();
            assert!(p2.max_abs_diff(&symmetrize_pair(a, b).unwrap()) < 1e-15);
            let p3 = symmetrize_pairing(&spec(&[a, b, c])).unwrap();
            assert!(p3.max_abs_diff(&symmetrize_triple(a, b, c).unwrap()) < 1e-15);
        }
    }

    #[test]
    fn pairing_matches_bruteforce_and_parity_law() {
        let mut rng = seeded_rng(23, 0);
        for k in 1..=7 {
            for _ in 0..20 {
                let dirs: Vec<Direction> = (0..k).map(|_| random_unit(&mut rng)).collect();
                let p = spec(&dirs);
                let brute = symmetrize_bruteforce(&p, false).unwrap();
                let pairing = symmetrize_pairing(&p).unwrap();
                assert!(brute.max_abs_diff(&pairing) < 1e-10, "k = {k}");
                if k % 2 == 0 {
                    assert!(brute.vector.norm() < 1e-10);
                } else {
                    assert!(brute.scalar.abs() < 1e-10);
                    assert!(pairing.vector.norm() <= 1.0 + 1e-12);
                }
            }
        }
    }

    #[test]
    fn bruteforce_is_hermitian() {
        let mut rng = seeded_rng(24, 0);
        for k in 2..=6 {
            let dirs: Vec<Direction> = (0..k).map(|_| random_unit(&mut rng)).collect();
            let m = permutation_average(&spec(&dirs), false).unwrap();
            assert!(m.is_hermitian(1e-12));
        }
    }

    #[test]
    fn matching_sums_of_subsets() {
        let mut rng = seeded_rng(25, 0);
        let dirs: Vec<Direction> = (0..6).map(|_| random_unit(&mut rng)).collect();
        let sums = MatchingSums::new(&dirs).unwrap();
        // {0,1,2,3}: three matchings
        let g = |i: usize, j: usize| dirs[i].dot(dirs[j]);
        let expect = g(0, 1) * g(2, 3) + g(0, 2) * g(1, 3) + g(0, 3) * g(1, 2);
        assert!((sums.matching_sum(0b1111) - expect).abs() < 1e-14);
        assert_eq!(sums.matching_sum(0b111), 0.0);
        // sub-products agree with a fresh evaluation of the same subset
        let sub = sums.symmetrized(0b101010);
        let direct = symmetrize_pairing(&spec(&[dirs[1], dirs[3], dirs[5]])).unwrap();
        assert!(sub.max_abs_diff(&direct) < 1e-14);
        assert!(MatchingSums::new(&vec![Direction::Z; PAIRING_LIMIT + 1]).is_err());
    }

    #[test]
    fn moyal_matches_triple_closed_form() {
        let mut rng = seeded_rng(26, 0);
        for _ in 0..10 {
            let d = [
                random_unit(&mut rng),
                random_unit(&mut rng),
                random_unit(&mut rng),
            ];
            let m = moyal_product_operator(&spec(&d), 1e-2).unwrap();
            let exact = symmetrize_triple(d[0], d[1], d[2]).unwrap().to_operator();
            assert!(m.matrix.max_abs_diff(&exact) < 1e-5);
            // the cosine part carries no θ0θ1θ2 term
            assert!(m.operator.scalar.abs() < 1e-6);
            assert!(m.imaginary_residual < 1e-6);
        }
    }

    #[test]
    fn moyal_hexagonal_and_orthogonal_cases() {
        let m = moyal_product_operator(&spec(&hex()), DEFAULT_MOYAL_STEP).unwrap();
        assert!(m.matrix.max_abs_diff(&Operator2::zero()) < 1e-6);
        let m = moyal_product_operator(&spec(&[Direction::X, Direction::Y]), DEFAULT_MOYAL_STEP)
            .unwrap();
        assert!(m.matrix.max_abs_diff(&Operator2::zero()) < 1e-6);
    }

    #[test]
    fn moyal_guards() {
        let p = spec(&[Direction::X, Direction::Y]);
        assert!(matches!(
            moyal_product_operator(&p, 0.0),
            Err(QuasiBellError::StepOutOfRange { .. })
        ));
        assert!(matches!(
            moyal_product_operator(&p, 0.2),
            Err(QuasiBellError::StepOutOfRange { .. })
        ));
        let p = spec(&[Direction::Z; MOYAL_LIMIT + 1]);
        assert!(matches!(
            moyal_product_operator(&p, 1e-2),
            Err(QuasiBellError::TooManyFactors { .. })
        ));
    }

    #[test]
    fn product_expectation_examples() {
        let mut rng = seeded_rng(27, 0);
        let (a, b) = (random_unit(&mut rng), random_unit(&mut rng));
        for _ in 0..10 {
            let u = random_in_ball(&mut rng);
            assert!((product_expectation(&spec(&[a, b]), u).unwrap() - a.dot(b)).abs() < 1e-15);
        }
        let c = random_unit(&mut rng);
        assert!(
            product_expectation(&spec(&[a, b, c]), Direction::ZERO)
                .unwrap()
                .abs()
                < 1e-15
        );
        let z = Direction::Z;
        assert!((product_expectation(&spec(&[z, z, z]), z).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            product_expectation(&spec(&[z]), Direction::new(0.0, 1.0, 1.0)),
            Err(QuasiBellError::BlochOutOfBall { .. })
        ));
    }

    #[test]
    fn symmetrized_pair_table_examples() {
        let u = Direction::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0);
        let t = symmetrized_pair_joint_table(u, Direction::X, Direction::Y).unwrap();
        let p = t.get(&[Outcome::Minus, Outcome::Minus]);
        assert!((p - (1.0 - SQRT_2) / 4.0).abs() < 1e-12);
        assert!((p + 0.1036).abs() < 1e-4);

        let t = symmetrized_pair_joint_table(Direction::ZERO, Direction::X, Direction::Z).unwrap();
        assert!(t.entries.iter().all(|p| (p - 0.25).abs() < 1e-15));

        let a = Direction::new(0.0, 0.6, 0.8);
        let t = symmetrized_pair_joint_table(u, a, a).unwrap();
        assert!(t.get(&[Outcome::Plus, Outcome::Minus]).abs() < 1e-15);
    }

    #[test]
    fn symmetrized_pair_table_matches_anticommutator_trace() {
        let mut rng = seeded_rng(28, 0);
        for _ in 0..100 {
            let (u, a0, a1) = (
                random_in_ball(&mut rng),
                random_unit(&mut rng),
                random_unit(&mut rng),
            );
            let closed = symmetrized_pair_joint_table(u, a0, a1).unwrap();
            let trace = symmetrized_pair_joint_table_by_trace(u, a0, a1).unwrap();
            assert!(closed.max_abs_diff(&trace) < 1e-12);
        }
    }
}
