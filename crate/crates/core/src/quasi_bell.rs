//! The order-`N` quasi-Bell expression `K_N = A_N† M_N B_N`.
//!
//! `A_N` is built recursively from `A_0 = [a_0]` by
//! `A_n = [A_{n-1}; a_0 a_n A_{n-1}]` with `a_k² = 1`, so entry `i` is the
//! product of the `a_k` over an odd-sized [`FactorSet`]. `M_N = M^{⊗N}` with
//! `M = ½[[1, 1], [1, -1]]`, i.e. `(M_N)_{ij} = 2^{-N} (-1)^{popcount(i & j)}`.
//!
//! Classically `K_N = ±1` for every assignment of `±1` outcomes. Quantizing
//! each product by symmetrization and taking the singlet expectation gives
//! `⟨K_N⟩ = -Σ_{ij} (M_N)_{ij} α_i·β_j`, where `α_i`, `β_j` are the
//! symmetrized product vectors.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Sub};

use rand::Rng;

use crate::direction::Direction;
use crate::error::{QuasiBellError, Result};
use crate::sampling::seeded_rng;
use crate::symmetrize::{MatchingSums, PAIRING_LIMIT};

/// Largest order accepted by [`QuasiBellInstance`].
pub const MAX_ORDER: usize = PAIRING_LIMIT - 1;

/// Default cap on the number of assignments [`classical_bound_verify`] enumerates.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 26;

/// Largest order whose assignments fit in the `u64` bit patterns used here.
const MAX_ENUMERATION_ORDER: usize = 30;

/// Odd-sized set of recursion levels `{0, …, N}` whose outcomes are multiplied
/// in one entry of `A_N`. Bit `k` set means level `k` is a factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FactorSet(pub u32);

impl FactorSet {
    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn contains(self, level: usize) -> bool {
        self.0 >> level & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Levels in increasing order.
    pub fn levels(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&k| self.contains(k))
    }
}

/// Factor set of entry `i` of `A_N`: bit `k - 1` of `i` records that
/// `a_0 a_k` was multiplied in at recursion level `k`, and `a_0² = 1`.
pub fn factor_set(order: usize, i: usize) -> Result<FactorSet> {
    let len = 1usize << order;
    if i >= len {
        return Err(QuasiBellError::IndexOutOfRange { index: i, len });
    }
    let levels = (i as u32) << 1;
    Ok(if i.count_ones() % 2 == 1 {
        FactorSet(levels)
    } else {
        FactorSet(levels | 1)
    })
}

fn factor_sets(order: usize) -> Vec<FactorSet> {
    (0..1usize << order)
        .map(|i| factor_set(order, i).expect("index in range"))
        .collect()
}

/// `(-1)^{popcount(i & j)}`.
pub fn hadamard_sign(i: usize, j: usize) -> i64 {
    if (i & j).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// `(M_N)_{ij} = 2^{-N} (-1)^{popcount(i & j)}`.
pub fn hadamard_entry(order: usize, i: usize, j: usize) -> f64 {
    hadamard_sign(i, j) as f64 / (1u64 << order) as f64
}

/// In-place unnormalized Walsh–Hadamard transform:
/// `x_i ← Σ_j (-1)^{popcount(i & j)} x_j`. The length must be a power of two.
pub fn walsh_hadamard<T>(x: &mut [T])
where
    T: Copy + Add<Output = T> + Sub<Output = T>,
{
    debug_assert!(x.len().is_power_of_two());
    let mut h = 1;
    while h < x.len() {
        for block in x.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (p, q) in lo.iter_mut().zip(hi.iter_mut()) {
                let (s, d) = (*p + *q, *p - *q);
                *p = s;
                *q = d;
            }
        }
        h *= 2;
    }
}

/// `±1` outcomes for Alice's `a_0…a_N` and Bob's `b_0…b_N`.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassicalAssignment {
    pub a_vals: Vec<i8>,
    pub b_vals: Vec<i8>,
}

impl ClassicalAssignment {
    pub fn new(a_vals: Vec<i8>, b_vals: Vec<i8>) -> Result<Self> {
        if a_vals.is_empty() {
            return Err(QuasiBellError::LengthMismatch {
                what: "outcomes",
                expected: 1,
                found: 0,
            });
        }
        if b_vals.len() != a_vals.len() {
            return Err(QuasiBellError::LengthMismatch {
                what: "b outcomes",
                expected: a_vals.len(),
                found: b_vals.len(),
            });
        }
        if let Some(&v) = a_vals.iter().chain(&b_vals).find(|v| v.abs() != 1) {
            return Err(QuasiBellError::OutOfRange {
                what: "outcome",
                value: v as f64,
                lo: -1.0,
                hi: 1.0,
            });
        }
        Ok(Self { a_vals, b_vals })
    }

    /// Assignment whose `a_k` (`b_k`) is `-1` exactly when bit `k` of
    /// `a_bits` (`b_bits`) is set.
    pub fn from_bits(order: usize, a_bits: u64, b_bits: u64) -> Self {
        let vals = |bits: u64| {
            (0..=order)
                .map(|k| if bits >> k & 1 == 1 { -1 } else { 1 })
                .collect()
        };
        Self {
            a_vals: vals(a_bits),
            b_vals: vals(b_bits),
        }
    }

    pub fn order(&self) -> usize {
        self.a_vals.len() - 1
    }
}

fn product_vector_bits(order: usize, bits: u64) -> Vec<i64> {
    factor_sets(order)
        .into_iter()
        .map(|s| {
            if (s.0 as u64 & bits).count_ones().is_multiple_of(2) {
                1
            } else {
                -1
            }
        })
        .collect()
}

/// `A_N` for the outcomes `vals = [a_0, …, a_N]`: entry `i` is the product
/// of `vals[k]` over `factor_set(N, i)`.
pub fn product_vector(vals: &[i8]) -> Vec<i64> {
    let order = vals.len().saturating_sub(1);
    factor_sets(order)
        .into_iter()
        .map(|s| s.levels().map(|k| vals[k] as i64).product())
        .collect()
}

/// `2^N M_N B_N` in exact integers. At `N = 2` these are the four test
/// expressions, exactly one of which is nonzero (`±4`) for each `b` triple.
pub fn test_expressions(b_vals: &[i8]) -> Vec<i64> {
    let mut hb = product_vector(b_vals);
    walsh_hadamard(&mut hb);
    hb
}

/// The four order-2 test expressions over all eight `b` triples, columns in
/// the order `+++, ++-, +-+, +--, -++, -+-, --+, ---`.
pub fn table1() -> [[i64; 8]; 4] {
    let columns: Vec<Vec<i64>> = (0..8)
        .map(|col| {
            let b: Vec<i8> = (0..3)
                .map(|k| if col >> (2 - k) & 1 == 1 { -1 } else { 1 })
                .collect();
            test_expressions(&b)
        })
        .collect();
    core::array::from_fn(|row| core::array::from_fn(|col| columns[col][row]))
}

/// `2^N K_N = A_N† H_N B_N` in exact integers.
pub fn classical_sum(asg: &ClassicalAssignment) -> i64 {
    let a = product_vector(&asg.a_vals);
    let hb = test_expressions(&asg.b_vals);
    a.iter().zip(&hb).map(|(x, y)| x * y).sum()
}

/// `K_N = A_N† M_N B_N`, always exactly `±1`.
pub fn classical_value(asg: &ClassicalAssignment) -> f64 {
    classical_sum(asg) as f64 / (1u64 << asg.order()) as f64
}

/// Extremes of `K_N` over a set of classical assignments.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassicalBoundReport {
    pub order: usize,
    /// Number of assignments evaluated.
    pub assignments: u64,
    pub min: f64,
    pub max: f64,
    /// Number of assignments with `|K_N| ≠ 1`.
    pub violations: u64,
    /// `false` when the assignments were sampled rather than enumerated.
    pub exhaustive: bool,
}

impl ClassicalBoundReport {
    /// `K_N = ±1` for every assignment seen.
    pub fn certified(&self) -> bool {
        self.violations == 0 && self.min == -1.0 && self.max == 1.0
    }
}

struct Extremes {
    min: i64,
    max: i64,
    violations: u64,
    count: u64,
}

impl Extremes {
    fn new() -> Self {
        Self {
            min: i64::MAX,
            max: i64::MIN,
            violations: 0,
            count: 0,
        }
    }

    fn push(&mut self, sum: i64, scale: i64) {
        self.min = self.min.min(sum);
        self.max = self.max.max(sum);
        self.count += 1;
        if sum.abs() != scale {
            self.violations += 1;
        }
    }

    fn report(self, order: usize, exhaustive: bool) -> ClassicalBoundReport {
        let scale = (1u64 << order) as f64;
        ClassicalBoundReport {
            order,
            assignments: self.count,
            min: self.min as f64 / scale,
            max: self.max as f64 / scale,
            violations: self.violations,
            exhaustive,
        }
    }
}

/// Number of assignments at order `N`, `2^{2(N+1)}`.
pub fn assignment_count(order: usize) -> Option<u64> {
    1u64.checked_shl(2 * (order as u32 + 1))
}

/// Evaluates `K_N` on every one of the `2^{2(N+1)}` assignments.
///
/// All `A_N` vectors and, per `b` assignment, one Walsh–Hadamard transform
/// are precomputed, so each assignment costs a single `2^N` dot product.
pub fn classical_bound_verify(order: usize, cap: u64) -> Result<ClassicalBoundReport> {
    let required = match assignment_count(order) {
        Some(n) if order <= MAX_ENUMERATION_ORDER => n,
        _ => u64::MAX,
    };
    if required > cap {
        return Err(QuasiBellError::EnumerationTooLarge { required, cap });
    }
    Ok(classical_bound_for_b(order, 0..1u64 << (order + 1)).report(order, true))
}

fn classical_bound_for_b(order: usize, b_range: core::ops::Range<u64>) -> Extremes {
    let per_party = 1u64 << (order + 1);
    let a_table: Vec<Vec<i64>> = (0..per_party)
        .map(|bits| product_vector_bits(order, bits))
        .collect();
    let scale = 1i64 << order;
    let mut ext = Extremes::new();
    for b_bits in b_range {
        let mut hb = product_vector_bits(order, b_bits);
        walsh_hadamard(&mut hb);
        for a in &a_table {
            ext.push(a.iter().zip(&hb).map(|(x, y)| x * y).sum(), scale);
        }
    }
    ext
}

/// Exhaustive enumeration restricted to the `b` assignments in `b_range`
/// (bit patterns as in [`ClassicalAssignment::from_bits`]); lets callers
/// split [`classical_bound_verify`] across workers and [`merge_reports`].
pub fn classical_bound_partial(
    order: usize,
    b_range: core::ops::Range<u64>,
) -> Result<ClassicalBoundReport> {
    if order > MAX_ENUMERATION_ORDER {
        return Err(QuasiBellError::OutOfRange {
            what: "order",
            value: order as f64,
            lo: 0.0,
            hi: MAX_ENUMERATION_ORDER as f64,
        });
    }
    let end = b_range.end.min(1u64 << (order + 1));
    Ok(classical_bound_for_b(order, b_range.start.min(end)..end).report(order, true))
}

/// Combines reports over disjoint assignment sets of the same order.
pub fn merge_reports(parts: &[ClassicalBoundReport]) -> Option<ClassicalBoundReport> {
    let (first, rest) = parts.split_first()?;
    Some(rest.iter().fold(*first, |acc, p| ClassicalBoundReport {
        order: acc.order,
        assignments: acc.assignments + p.assignments,
        min: acc.min.min(p.min),
        max: acc.max.max(p.max),
        violations: acc.violations + p.violations,
        exhaustive: acc.exhaustive && p.exhaustive,
    }))
}

/// Evaluates `K_N` on `samples` assignments drawn uniformly with a seeded
/// generator. A probabilistic certificate for orders too large to enumerate.
pub fn classical_bound_sample(order: usize, samples: u64, seed: u64) -> ClassicalBoundReport {
    let mut rng = seeded_rng(seed, order as u64);
    let mut ext = Extremes::new();
    let scale = 1i64 << order;
    for _ in 0..samples {
        let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<i8> {
            (0..=order)
                .map(|_| if rng.random::<bool>() { 1 } else { -1 })
                .collect()
        };
        let asg = ClassicalAssignment {
            a_vals: draw(&mut rng),
            b_vals: draw(&mut rng),
        };
        ext.push(classical_sum(&asg), scale);
    }
    ext.report(order, false)
}

/// Measurement axes `â_0…â_N`, `b̂_0…b̂_N` for the order-`N` expression.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuasiBellInstance {
    pub order: usize,
    pub a_dirs: Vec<Direction>,
    pub b_dirs: Vec<Direction>,
}

impl QuasiBellInstance {
    pub fn new(order: usize, a_dirs: Vec<Direction>, b_dirs: Vec<Direction>) -> Result<Self> {
        if order > MAX_ORDER {
            return Err(QuasiBellError::OutOfRange {
                what: "order",
                value: order as f64,
                lo: 0.0,
                hi: MAX_ORDER as f64,
            });
        }
        for (what, dirs) in [("a directions", &a_dirs), ("b directions", &b_dirs)] {
            if dirs.len() != order + 1 {
                return Err(QuasiBellError::LengthMismatch {
                    what,
                    expected: order + 1,
                    found: dirs.len(),
                });
            }
            for d in dirs {
                d.require_unit()?;
            }
        }
        Ok(Self {
            order,
            a_dirs,
            b_dirs,
        })
    }

    /// `â0 = x̂`, `â1 = ŷ`, `b̂0 = (x̂+ŷ)/√2`, `b̂1 = (x̂-ŷ)/√2`: value `-√2`,
    /// maximal in absolute value.
    pub fn chsh() -> Self {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        Self {
            order: 1,
            a_dirs: vec![Direction::X, Direction::Y],
            b_dirs: vec![Direction::new(s, s, 0.0), Direction::new(s, -s, 0.0)],
        }
    }

    /// Six coplanar axes 60° apart, `â_k·b̂_j` as in the order-2 optimum: value `3/2`.
    pub fn order2_optimum() -> Self {
        let h = libm::sqrt(3.0) / 2.0;
        Self {
            order: 2,
            a_dirs: vec![
                Direction::X,
                Direction::new(0.5, h, 0.0),
                Direction::new(0.5, -h, 0.0),
            ],
            b_dirs: vec![
                -Direction::X,
                Direction::new(-0.5, h, 0.0),
                Direction::new(-0.5, -h, 0.0),
            ],
        }
    }

    /// Same instance with every `b̂_k` negated; flips the sign of the value.
    pub fn flipped_b(&self) -> Self {
        Self {
            b_dirs: self.b_dirs.iter().map(|d| -*d).collect(),
            ..self.clone()
        }
    }

    /// `â_k·b̂_j` as a row-major `(N+1)×(N+1)` matrix.
    pub fn inner_products(&self) -> Vec<Vec<f64>> {
        self.a_dirs
            .iter()
            .map(|a| self.b_dirs.iter().map(|b| a.dot(*b)).collect())
            .collect()
    }

    /// Symmetrized product vectors `α_i` and `β_i`, `i` in `[0, 2^N)`.
    pub fn per_index_vectors(&self) -> (Vec<Direction>, Vec<Direction>) {
        let sets = factor_sets(self.order);
        let vectors = |dirs: &[Direction]| -> Vec<Direction> {
            let sums = MatchingSums::new(dirs).expect("order bounded by MAX_ORDER");
            sets.iter()
                .map(|s| sums.symmetrized(s.0 as usize).vector)
                .collect()
        };
        (vectors(&self.a_dirs), vectors(&self.b_dirs))
    }

    /// `⟨K_N⟩ = -2^{-N} Σ_i α_i·(H_N β)_i` in the singlet.
    pub fn quantum_value(&self) -> f64 {
        let (alpha, mut beta) = self.per_index_vectors();
        walsh_hadamard(&mut beta);
        let s: f64 = alpha.iter().zip(&beta).map(|(a, b)| a.dot(*b)).sum();
        -s / (1u64 << self.order) as f64
    }
}

/// Werner-state value: every singlet correlator, and hence `⟨K_N⟩`, scales by `z`.
pub fn werner_value(inst: &QuasiBellInstance, z: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&z) {
        return Err(QuasiBellError::OutOfRange {
            what: "z",
            value: z,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(z * inst.quantum_value())
}
