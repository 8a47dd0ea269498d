//! Joint (quasi-)probability tables for spin measurements.
//!
//! Two families live here. The commuting tables describe Alice and Bob each
//! measuring their own qubit, either quantum mechanically or through a local
//! hidden-variable average. The noncommuting tables describe two or three
//! measurements on *one* qubit with Bloch vector `u`: the single-observable
//! marginals are fixed to `½(1 + a â·u)` and the remaining freedom sits in the
//! product correlators, which are inputs here. Nothing stops those correlators
//! from producing negative entries; mapping where that happens is the point.
//!
//! A correlation matrix `R_nc` that would let two qubits simulate the
//! noncommuting pair (`⟨a0 a1⟩ = â0† R_nc â1` with `v = u`) is a useful way to
//! read [`noncommuting_pair_table`] against [`quantum_pair_table`], but it is
//! not modelled separately.

use alloc::vec;
use alloc::vec::Vec;

use crate::direction::Direction;
use crate::error::{QuasiBellError, Result};
use crate::pauli::{projector, BlochState, Outcome};
use crate::tolerance;

/// Product correlators of a noncommuting table.
///
/// `pairs` is ordered `⟨a0a1⟩` for arity 2 and `⟨a0a1⟩, ⟨a0a2⟩, ⟨a1a2⟩` for
/// arity 3; `triple` is `⟨a0a1a2⟩` and only present for arity 3.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CorrelatorSpec {
    pub pairs: Vec<f64>,
    pub triple: Option<f64>,
}

impl CorrelatorSpec {
    pub fn pair(c01: f64) -> Self {
        Self {
            pairs: vec![c01],
            triple: None,
        }
    }

    pub fn triple(c01: f64, c02: f64, c12: f64, c012: f64) -> Self {
        Self {
            pairs: vec![c01, c02, c12],
            triple: Some(c012),
        }
    }

    /// `⟨a_i a_j⟩` for `i != j` in an arity-3 spec.
    fn triple_pair(&self, i: usize, j: usize) -> f64 {
        self.pairs[pair_slot(i, j)]
    }

    /// Independent (product) correlators `∏ (â_k·u)` for two or three axes.
    pub fn independence(u: Direction, dirs: &[Direction]) -> Self {
        let m: Vec<f64> = dirs.iter().map(|d| d.dot(u)).collect();
        match m.len() {
            2 => Self::pair(m[0] * m[1]),
            _ => Self::triple(m[0] * m[1], m[0] * m[2], m[1] * m[2], m[0] * m[1] * m[2]),
        }
    }

    fn arity(&self) -> usize {
        if self.triple.is_some() {
            3
        } else {
            2
        }
    }
}

fn pair_slot(i: usize, j: usize) -> usize {
    match (i.min(j), i.max(j)) {
        (0, 1) => 0,
        (0, 2) => 1,
        (1, 2) => 2,
        _ => unreachable!("pair ({i}, {j}) outside a triple"),
    }
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.lo - tol && x <= self.hi + tol
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Signed probabilities over `{+1, -1}^arity`.
///
/// Entry `k` belongs to the tuple whose `j`-th outcome is `-1` exactly when bit
/// `arity - 1 - j` of `k` is set, so a pair table is ordered
/// `(+,+), (+,-), (-,+), (-,-)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeTable {
    pub arity: usize,
    pub entries: Vec<f64>,
    /// Measurement axes, one per observable.
    pub directions: Vec<Direction>,
    /// Alice's Bloch vector.
    pub bloch_u: Direction,
    /// Product correlators the table was built from, when it has any.
    pub correlators: Option<CorrelatorSpec>,
}

impl OutcomeTable {
    /// The outcome tuple stored at `index`.
    pub fn outcomes_at(arity: usize, index: usize) -> Vec<Outcome> {
        (0..arity)
            .map(|j| {
                if index >> (arity - 1 - j) & 1 == 1 {
                    Outcome::Minus
                } else {
                    Outcome::Plus
                }
            })
            .collect()
    }

    pub fn index_of(outcomes: &[Outcome]) -> usize {
        outcomes
            .iter()
            .fold(0, |acc, o| (acc << 1) | usize::from(*o == Outcome::Minus))
    }

    pub fn get(&self, outcomes: &[Outcome]) -> f64 {
        debug_assert_eq!(outcomes.len(), self.arity);
        self.entries[Self::index_of(outcomes)]
    }

    /// Iterates `(tuple, entry)` in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<Outcome>, f64)> + '_ {
        self.entries
            .iter()
            .enumerate()
            .map(|(k, p)| (Self::outcomes_at(self.arity, k), *p))
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().sum()
    }

    /// The most negative (smallest) entry.
    pub fn min_entry(&self) -> f64 {
        self.entries.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_non_negative(&self) -> bool {
        self.min_entry() >= -tolerance::NON_NEGATIVE
    }

    /// `p(a_k = outcome)`, summing out every other observable.
    pub fn marginal(&self, k: usize, outcome: Outcome) -> f64 {
        self.iter()
            .filter(|(t, _)| t[k] == outcome)
            .map(|(_, p)| p)
            .sum()
    }

    /// Sums out observable `drop`, keeping the others in order.
    pub fn marginalize(&self, drop: usize) -> OutcomeTable {
        let arity = self.arity - 1;
        let mut entries = vec![0.0; 1 << arity];
        for (t, p) in self.iter() {
            let kept: Vec<Outcome> = t
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != drop)
                .map(|(_, o)| *o)
                .collect();
            entries[Self::index_of(&kept)] += p;
        }
        let directions = self
            .directions
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != drop)
            .map(|(_, d)| *d)
            .collect();
        let correlators = match (&self.correlators, self.arity) {
            (Some(c), 3) => {
                let keep: Vec<usize> = (0..3).filter(|j| *j != drop).collect();
                Some(CorrelatorSpec::pair(c.triple_pair(keep[0], keep[1])))
            }
            _ => None,
        };
        OutcomeTable {
            arity,
            entries,
            directions,
            bloch_u: self.bloch_u,
            correlators,
        }
    }

    /// Largest absolute entry difference; tables must share an arity.
    pub fn max_abs_diff(&self, other: &OutcomeTable) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn check_range(what: &'static str, value: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&value) {
        return Err(QuasiBellError::OutOfRange {
            what,
            value,
            lo: -1.0,
            hi: 1.0,
        });
    }
    Ok(())
}

/// `p_q(a, b) = Tr[ρ P_a(â) ⊗ P_b(b̂)] = ¼(1 + a â·u + b b̂·v + ab â†R b̂)`.
pub fn quantum_pair_table(s: &BlochState, a: Direction, b: Direction) -> Result<OutcomeTable> {
    a.require_unit()?;
    b.require_unit()?;
    let (ma, mb, corr) = (a.dot(s.u), b.dot(s.v), s.correlation(a, b));
    let entries = (0..4)
        .map(|k| {
            let t = OutcomeTable::outcomes_at(2, k);
            let (x, y) = (t[0].sign(), t[1].sign());
            0.25 * (1.0 + x * ma + y * mb + x * y * corr)
        })
        .collect();
    Ok(OutcomeTable {
        arity: 2,
        entries,
        directions: vec![a, b],
        bloch_u: s.u,
        correlators: Some(CorrelatorSpec::pair(corr)),
    })
}

/// [`quantum_pair_table`] evaluated as explicit traces against the density matrix.
pub fn quantum_pair_table_by_trace(
    s: &BlochState,
    a: Direction,
    b: Direction,
) -> Result<OutcomeTable> {
    let rho = s.density_matrix();
    let mut entries = Vec::with_capacity(4);
    for k in 0..4 {
        let t = OutcomeTable::outcomes_at(2, k);
        let p = projector(a, t[0])?.kron(&projector(b, t[1])?);
        entries.push(rho.trace_product(&p).re);
    }
    Ok(OutcomeTable {
        arity: 2,
        entries,
        directions: vec![a, b],
        bloch_u: s.u,
        correlators: Some(CorrelatorSpec::pair(s.correlation(a, b))),
    })
}

/// Local hidden-variable table `¼(1 + a f̄_A + b f̄_B + ab f̄_AB)` from the
/// hidden-variable averages of Alice's and Bob's response functions.
pub fn lhv_pair_table(fbar_a: f64, fbar_b: f64, fbar_ab: f64) -> Result<OutcomeTable> {
    check_range("fbar_a", fbar_a)?;
    check_range("fbar_b", fbar_b)?;
    check_range("fbar_ab", fbar_ab)?;
    let entries = (0..4)
        .map(|k| {
            let t = OutcomeTable::outcomes_at(2, k);
            let (x, y) = (t[0].sign(), t[1].sign());
            0.25 * (1.0 + x * fbar_a + y * fbar_b + x * y * fbar_ab)
        })
        .collect();
    Ok(OutcomeTable {
        arity: 2,
        entries,
        directions: Vec::new(),
        bloch_u: Direction::ZERO,
        correlators: Some(CorrelatorSpec::pair(fbar_ab)),
    })
}

/// `p(a0, a1) = ¼(1 + a0 â0·u + a1 â1·u + a0 a1 ⟨a0a1⟩)` for two noncommuting
/// measurements on one qubit.
pub fn noncommuting_pair_table(
    u: Direction,
    a0: Direction,
    a1: Direction,
    c: &CorrelatorSpec,
) -> Result<OutcomeTable> {
    a0.require_unit()?;
    a1.require_unit()?;
    u.require_in_ball()?;
    if c.arity() != 2 || c.pairs.len() != 1 {
        return Err(QuasiBellError::WrongArity {
            expected: 2,
            found: c.arity(),
        });
    }
    let (m0, m1, c01) = (a0.dot(u), a1.dot(u), c.pairs[0]);
    let entries = (0..4)
        .map(|k| {
            let t = OutcomeTable::outcomes_at(2, k);
            let (x, y) = (t[0].sign(), t[1].sign());
            0.25 * (1.0 + x * m0 + y * m1 + x * y * c01)
        })
        .collect();
    Ok(OutcomeTable {
        arity: 2,
        entries,
        directions: vec![a0, a1],
        bloch_u: u,
        correlators: Some(c.clone()),
    })
}

/// The set of `⟨a0a1⟩` keeping every entry of [`noncommuting_pair_table`]
/// non-negative.
///
/// With `m_k = â_k·u`, positivity reads
/// `-(1 ± m0)(1 ± m1) <= D <= (1 ± m0)(1 ∓ m1)` for both sign choices, where
/// `D = ⟨a0a1⟩ - m0 m1`.
pub fn positivity_interval(u: Direction, a0: Direction, a1: Direction) -> Result<Interval> {
    a0.require_unit()?;
    a1.require_unit()?;
    u.require_in_ball()?;
    let (m0, m1) = (a0.dot(u), a1.dot(u));
    let product = m0 * m1;
    let d_lo = (-(1.0 + m0) * (1.0 + m1)).max(-(1.0 - m0) * (1.0 - m1));
    let d_hi = ((1.0 + m0) * (1.0 - m1)).min((1.0 - m0) * (1.0 + m1));
    Ok(Interval {
        lo: product + d_lo,
        hi: product + d_hi,
    })
}

/// Symmetric mixed-state choice
/// `⟨a0a1⟩ = [â0·u + â1·u + (1-|u|) â0·â1](1-|u|) + (â0·u)(â1·u)`.
///
/// Reduces to `â0·â1` for `u = 0` and to the independent product for `|u| = 1`.
pub fn mixed_state_correlator(u: Direction, a0: Direction, a1: Direction) -> Result<f64> {
    u.require_in_ball()?;
    let r = u.norm();
    let (m0, m1) = (a0.dot(u), a1.dot(u));
    Ok((m0 + m1 + (1.0 - r) * a0.dot(a1)) * (1.0 - r) + m0 * m1)
}

/// `⟨a0a1⟩ = (α + â0·u)(1-|u|) + (â0·u)(â1·u)` for `α` in `[-1, 1]`.
pub fn alpha_family_correlator(
    u: Direction,
    a0: Direction,
    a1: Direction,
    alpha: f64,
) -> Result<f64> {
    u.require_in_ball()?;
    check_range("alpha", alpha)?;
    let (m0, m1) = (a0.dot(u), a1.dot(u));
    Ok((alpha + m0) * (1.0 - u.norm()) + m0 * m1)
}

/// Fréchet bounds for one outcome pair.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PairFrechet {
    pub outcomes: [Outcome; 2],
    pub joint: f64,
    /// `p(a0) + p(a1) - 1`
    pub lower: f64,
    /// `min{p(a0), p(a1)}`
    pub upper: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FrechetPairReport {
    pub tuples: Vec<PairFrechet>,
    /// Both bounds hold for all four tuples.
    pub frechet_holds: bool,
    /// Every entry is non-negative.
    pub positive: bool,
    /// `frechet_holds == positive`.
    pub equivalent: bool,
}

/// Checks the two-observable Fréchet bounds tuple by tuple and compares the
/// verdict with plain non-negativity.
pub fn frechet_pair_check(t: &OutcomeTable) -> Result<FrechetPairReport> {
    if t.arity != 2 {
        return Err(QuasiBellError::WrongArity {
            expected: 2,
            found: t.arity,
        });
    }
    let tol = tolerance::NON_NEGATIVE;
    let tuples: Vec<PairFrechet> = t
        .iter()
        .map(|(o, joint)| {
            let (p0, p1) = (t.marginal(0, o[0]), t.marginal(1, o[1]));
            let lower = p0 + p1 - 1.0;
            let upper = p0.min(p1);
            PairFrechet {
                outcomes: [o[0], o[1]],
                joint,
                lower,
                upper,
                lower_ok: lower <= joint + tol,
                upper_ok: joint <= upper + tol,
            }
        })
        .collect();
    let frechet_holds = tuples.iter().all(|c| c.lower_ok && c.upper_ok);
    let positive = t.is_non_negative();
    Ok(FrechetPairReport {
        tuples,
        frechet_holds,
        positive,
        equivalent: frechet_holds == positive,
    })
}

/// Eight-entry table
/// `⅛(1 + Σ a_i â_i·u + Σ a_i a_j ⟨a_i a_j⟩ + a0 a1 a2 ⟨a0a1a2⟩)`.
pub fn noncommuting_triple_table(
    u: Direction,
    dirs: [Direction; 3],
    c: &CorrelatorSpec,
) -> Result<OutcomeTable> {
    for d in dirs {
        d.require_unit()?;
    }
    u.require_in_ball()?;
    let c012 = match (c.triple, c.pairs.len()) {
        (Some(t), 3) => t,
        _ => {
            return Err(QuasiBellError::WrongArity {
                expected: 3,
                found: c.arity(),
            })
        }
    };
    let m: Vec<f64> = dirs.iter().map(|d| d.dot(u)).collect();
    let entries = (0..8)
        .map(|k| {
            let t = OutcomeTable::outcomes_at(3, k);
            let s: Vec<f64> = t.iter().map(|o| o.sign()).collect();
            let mut p = 1.0 + s[0] * m[0] + s[1] * m[1] + s[2] * m[2];
            p += s[0] * s[1] * c.triple_pair(0, 1);
            p += s[0] * s[2] * c.triple_pair(0, 2);
            p += s[1] * s[2] * c.triple_pair(1, 2);
            p += s[0] * s[1] * s[2] * c012;
            p / 8.0
        })
        .collect();
    Ok(OutcomeTable {
        arity: 3,
        entries,
        directions: dirs.to_vec(),
        bloch_u: u,
        correlators: Some(c.clone()),
    })
}

/// Three-observable Fréchet bounds for one outcome triple, evaluated directly
/// and in their rewritten "sums of entries" form.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TripleFrechet {
    pub outcomes: [Outcome; 3],
    pub joint: f64,
    /// `max_i {p(a_i) + p(a_j, a_k) - 1}`
    pub lower: f64,
    /// `min_{mn} p(a_m, a_n)`
    pub upper: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
    /// `min_i [p(-a_i,-a_j,-a_k) + p(-a_i,-a_j,a_k) + p(-a_i,a_j,-a_k)]`
    pub lower_rewritten: f64,
    /// `min_l p(-a_l, a_m, a_n)`
    pub upper_rewritten: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FrechetTripleReport {
    pub tuples: Vec<TripleFrechet>,
    pub lower_holds: bool,
    pub upper_holds: bool,
    pub positive: bool,
    /// `upper_holds == positive`.
    pub upper_equivalent: bool,
    /// `positive ⇒ lower_holds`.
    pub lower_implied: bool,
    /// Direct and rewritten forms give the same verdict for every tuple.
    pub rewritten_consistent: bool,
}

/// Checks the three-observable Fréchet bounds of `t` using the pair tables for
/// `(0,1), (0,2), (1,2)`, which must be the corresponding marginals of `t`.
pub fn frechet_triple_check(
    t: &OutcomeTable,
    pair_tables: [&OutcomeTable; 3],
) -> Result<FrechetTripleReport> {
    if t.arity != 3 {
        return Err(QuasiBellError::WrongArity {
            expected: 3,
            found: t.arity,
        });
    }
    // pair (0,1) drops 2, (0,2) drops 1, (1,2) drops 0
    for (slot, drop) in [(0usize, 2usize), (1, 1), (2, 0)] {
        let pt = pair_tables[slot];
        if pt.arity != 2 {
            return Err(QuasiBellError::WrongArity {
                expected: 2,
                found: pt.arity,
            });
        }
        let residual = t.marginalize(drop).max_abs_diff(pt);
        if residual > tolerance::TABLE {
            return Err(QuasiBellError::InconsistentMarginals {
                pair: slot,
                residual,
            });
        }
    }
    let tol = tolerance::NON_NEGATIVE;
    let pair_p = |m: usize, n: usize, o: &[Outcome]| -> f64 {
        pair_tables[pair_slot(m, n)].get(&[o[m.min(n)], o[m.max(n)]])
    };
    let single_p = |i: usize, o: Outcome| -> f64 {
        // any pair table containing i carries the same marginal
        let other = if i == 0 { 1 } else { 0 };
        let pt = pair_tables[pair_slot(i, other)];
        pt.marginal(if i < other { 0 } else { 1 }, o)
    };
    let with = |o: &[Outcome], flips: &[usize]| -> f64 {
        let mut v = o.to_vec();
        for &f in flips {
            v[f] = v[f].flipped();
        }
        t.get(&v)
    };

    let mut tuples = Vec::with_capacity(8);
    for (o, joint) in t.iter() {
        let mut lower = f64::NEG_INFINITY;
        let mut lower_rewritten = f64::INFINITY;
        let mut upper = f64::INFINITY;
        let mut upper_rewritten = f64::INFINITY;
        for i in 0..3 {
            let (j, k) = match i {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            lower = lower.max(single_p(i, o[i]) + pair_p(j, k, &o) - 1.0);
            lower_rewritten =
                lower_rewritten.min(with(&o, &[i, j, k]) + with(&o, &[i, j]) + with(&o, &[i, k]));
            // i plays the role of the excluded index l
            upper = upper.min(pair_p(j, k, &o));
            upper_rewritten = upper_rewritten.min(with(&o, &[i]));
        }
        tuples.push(TripleFrechet {
            outcomes: [o[0], o[1], o[2]],
            joint,
            lower,
            upper,
            lower_ok: lower <= joint + tol,
            upper_ok: joint <= upper + tol,
            lower_rewritten,
            upper_rewritten,
        });
    }
    let lower_holds = tuples.iter().all(|c| c.lower_ok);
    let upper_holds = tuples.iter().all(|c| c.upper_ok);
    let positive = t.is_non_negative();
    let rewritten_consistent = tuples.iter().all(|c| {
        c.lower_ok == (c.lower_rewritten >= -tol) && c.upper_ok == (c.upper_rewritten >= -tol)
    });
    Ok(FrechetTripleReport {
        tuples,
        lower_holds,
        upper_holds,
        positive,
        upper_equivalent: upper_holds == positive,
        lower_implied: !positive || lower_holds,
        rewritten_consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_correlator, random_in_ball, random_unit, seeded_rng};
    use core::f64::consts::FRAC_1_SQRT_2;
    use Outcome::{Minus as M, Plus as P};

    fn assert_entries(t: &OutcomeTable, expected: &[f64], tol: f64) {
        for (k, (e, x)) in t.entries.iter().zip(expected).enumerate() {
            assert!((e - x).abs() <= tol, "entry {k}: {e} vs {x}");
        }
    }

    /// Marginal of observable `k` must be `½(1 + a â_k·u)`.
    fn assert_marginals(t: &OutcomeTable) {
        for (k, d) in t.directions.iter().enumerate() {
            for o in Outcome::BOTH {
                let expect = 0.5 * (1.0 + o.sign() * d.dot(t.bloch_u));
                assert!((t.marginal(k, o) - expect).abs() < 1e-10);
            }
        }
        assert!((t.total() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn outcome_indexing() {
        assert_eq!(OutcomeTable::outcomes_at(2, 1), vec![P, M]);
        assert_eq!(OutcomeTable::outcomes_at(3, 6), vec![M, M, P]);
        assert_eq!(OutcomeTable::index_of(&[M, P, M]), 5);
    }

    #[test]
    fn singlet_pair_table_is_anticorrelated() {
        let t = quantum_pair_table(&BlochState::singlet(), Direction::Z, Direction::Z).unwrap();
        assert_entries(&t, &[0.0, 0.5, 0.5, 0.0], 1e-15);
    }

    #[test]
    fn maximally_mixed_pair_table_is_uniform() {
        let b = Direction::new(0.6, 0.0, 0.8);
        let t = quantum_pair_table(&BlochState::maximally_mixed(), Direction::X, b).unwrap();
        assert_entries(&t, &[0.25; 4], 1e-15);
    }

    #[test]
    fn polarized_alice_pair_table() {
        let s = BlochState::new(Direction::Z, Direction::ZERO, [[0.0; 3]; 3]);
        let t = quantum_pair_table(&s, Direction::Z, Direction::Z).unwrap();
        // ¼(1 + a): a = +1 → ½, a = -1 → 0
        assert_entries(&t, &[0.5, 0.5, 0.0, 0.0], 1e-15);
    }

    #[test]
    fn pair_table_agrees_with_trace_route() {
        let mut rng = seeded_rng(11, 0);
        for _ in 0..50 {
            let mut r = [[0.0; 3]; 3];
            for row in r.iter_mut() {
                for x in row.iter_mut() {
                    *x = random_correlator(&mut rng);
                }
            }
            let s = BlochState::new(random_in_ball(&mut rng), random_in_ball(&mut rng), r);
            let (a, b) = (random_unit(&mut rng), random_unit(&mut rng));
            let closed = quantum_pair_table(&s, a, b).unwrap();
            let trace = quantum_pair_table_by_trace(&s, a, b).unwrap();
            assert!(closed.max_abs_diff(&trace) < 1e-12);
        }
    }

    #[test]
    fn quantum_pair_table_rejects_non_unit() {
        let err = quantum_pair_table(
            &BlochState::singlet(),
            Direction::new(0.0, 0.0, 1.5),
            Direction::Z,
        );
        assert!(matches!(err, Err(QuasiBellError::NonUnitDirection { .. })));
    }

    #[test]
    fn lhv_examples() {
        assert_entries(&lhv_pair_table(0.0, 0.0, 0.0).unwrap(), &[0.25; 4], 0.0);
        assert_entries(
            &lhv_pair_table(1.0, 1.0, 1.0).unwrap(),
            &[1.0, 0.0, 0.0, 0.0],
            0.0,
        );
        assert_entries(
            &lhv_pair_table(0.0, 0.0, -1.0).unwrap(),
            &[0.0, 0.5, 0.5, 0.0],
            0.0,
        );
        assert!(matches!(
            lhv_pair_table(0.0, 1.2, 0.0),
            Err(QuasiBellError::OutOfRange { what: "fbar_b", .. })
        ));
    }

    #[test]
    fn symmetrized_correlator_gives_negative_entry() {
        let u = Direction::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0);
        let t = noncommuting_pair_table(u, Direction::X, Direction::Y, &CorrelatorSpec::pair(0.0))
            .unwrap();
        let expect = (1.0 - core::f64::consts::SQRT_2) / 4.0;
        assert!((t.get(&[M, M]) - expect).abs() < 1e-12);
        assert!((t.min_entry() - expect).abs() < 1e-12);
        assert_marginals(&t);
    }

    #[test]
    fn perfectly_correlated_noncommuting_pair() {
        let a1 = Direction::new(0.0, 0.6, 0.8);
        let t = noncommuting_pair_table(
            Direction::ZERO,
            Direction::X,
            a1,
            &CorrelatorSpec::pair(1.0),
        )
        .unwrap();
        assert_entries(&t, &[0.5, 0.0, 0.0, 0.5], 1e-15);
        let t = noncommuting_pair_table(
            Direction::Z,
            Direction::Z,
            Direction::Z,
            &CorrelatorSpec::pair(1.0),
        )
        .unwrap();
        assert_entries(&t, &[1.0, 0.0, 0.0, 0.0], 1e-15);
    }

    #[test]
    fn noncommuting_pair_table_errors() {
        let c = CorrelatorSpec::pair(0.0);
        assert!(matches!(
            noncommuting_pair_table(
                Direction::new(0.0, 0.0, 1.1),
                Direction::X,
                Direction::Y,
                &c
            ),
            Err(QuasiBellError::BlochOutOfBall { .. })
        ));
        assert!(matches!(
            noncommuting_pair_table(
                Direction::ZERO,
                Direction::X,
                Direction::Y,
                &CorrelatorSpec::triple(0.0, 0.0, 0.0, 0.0)
            ),
            Err(QuasiBellError::WrongArity { .. })
        ));
    }

    /// Interval of `c` for which all four entries are ≥ 0, by scanning `c`
    /// on a fine grid and bisecting the edges.
    fn interval_by_scan(u: Direction, a0: Direction, a1: Direction) -> Option<Interval> {
        let ok = |c: f64| {
            noncommuting_pair_table(u, a0, a1, &CorrelatorSpec::pair(c))
                .unwrap()
                .min_entry()
                >= 0.0
        };
        let n = 4000;
        let grid: Vec<f64> = (0..=n).map(|k| -3.0 + 6.0 * k as f64 / n as f64).collect();
        let first = grid.iter().position(|c| ok(*c))?;
        let last = grid.iter().rposition(|c| ok(*c))?;
        let bisect = |mut inside: f64, mut outside: f64| {
            for _ in 0..80 {
                let mid = 0.5 * (inside + outside);
                if ok(mid) {
                    inside = mid;
                } else {
                    outside = mid;
                }
            }
            inside
        };
        let lo = if first == 0 {
            grid[0]
        } else {
            bisect(grid[first], grid[first - 1])
        };
        let hi = if last == n {
            grid[n]
        } else {
            bisect(grid[last], grid[last + 1])
        };
        Some(Interval { lo, hi })
    }

    #[test]
    fn positivity_interval_matches_scan() {
        let u = Direction::new(0.0, 0.0, 0.5);
        let iv = positivity_interval(u, Direction::X, Direction::Y).unwrap();
        let scan = interval_by_scan(u, Direction::X, Direction::Y).unwrap();
        assert!((iv.lo - scan.lo).abs() < 1e-12 && (iv.hi - scan.hi).abs() < 1e-12);
        // axes orthogonal to u: weak condition
        assert!((iv.lo + 1.0).abs() < 1e-15 && (iv.hi - 1.0).abs() < 1e-15);

        let mut rng = seeded_rng(5, 0);
        for _ in 0..100 {
            let (u, a0, a1) = (
                random_in_ball(&mut rng),
                random_unit(&mut rng),
                random_unit(&mut rng),
            );
            let iv = positivity_interval(u, a0, a1).unwrap();
            let scan = interval_by_scan(u, a0, a1).unwrap();
            assert!((iv.lo - scan.lo).abs() < 1e-12, "{iv:?} vs {scan:?}");
            assert!((iv.hi - scan.hi).abs() < 1e-12, "{iv:?} vs {scan:?}");
        }
    }

    #[test]
    fn positivity_interval_for_maximally_mixed_state() {
        let iv = positivity_interval(Direction::ZERO, Direction::X, Direction::Z).unwrap();
        assert_eq!(iv, Interval { lo: -1.0, hi: 1.0 });
    }

    #[test]
    fn pure_state_interval_collapses_to_independence() {
        let mut rng = seeded_rng(9, 0);
        for k in 0..100 {
            let u = random_unit(&mut rng);
            let a1 = random_unit(&mut rng);
            let a0 = if k % 2 == 0 { u } else { -u };
            let iv = positivity_interval(u, a0, a1).unwrap();
            let independent = a0.dot(u) * a1.dot(u);
            assert!(iv.width().abs() < 1e-9);
            assert!((iv.lo - independent).abs() < 1e-9 && (iv.hi - independent).abs() < 1e-9);
            // and with the roles of the axes swapped
            let iv = positivity_interval(u, a1, a0).unwrap();
            assert!(iv.width().abs() < 1e-9);
        }
    }

    #[test]
    fn mixed_state_correlator_limits() {
        let (a0, a1) = (Direction::new(0.6, 0.8, 0.0), Direction::new(0.0, 0.6, 0.8));
        let c = mixed_state_correlator(Direction::ZERO, a0, a1).unwrap();
        assert!((c - a0.dot(a1)).abs() < 1e-15);
        let u = Direction::new(0.0, 0.0, 1.0);
        let c = mixed_state_correlator(u, a0, a1).unwrap();
        assert!((c - a0.dot(u) * a1.dot(u)).abs() < 1e-15);
        // u = ½ẑ, â0 = ẑ, â1 = x̂: (½ + 0 + 0)·½ + 0 = ¼
        let u = Direction::new(0.0, 0.0, 0.5);
        let c = mixed_state_correlator(u, Direction::Z, Direction::X).unwrap();
        assert!((c - 0.25).abs() < 1e-15);
        assert!(positivity_interval(u, Direction::Z, Direction::X)
            .unwrap()
            .contains(c, 1e-12));
    }

    #[test]
    fn mixed_state_correlator_is_positive_with_an_axis_along_u() {
        let mut rng = seeded_rng(12, 0);
        for _ in 0..500 {
            let u = random_in_ball(&mut rng);
            let Some(uhat) = u.normalized() else { continue };
            let a = random_unit(&mut rng);
            for (a0, a1) in [(a, uhat), (uhat, a)] {
                let c = mixed_state_correlator(u, a0, a1).unwrap();
                let iv = positivity_interval(u, a0, a1).unwrap();
                assert!(iv.contains(c, 1e-12), "{c} not in {iv:?}");
            }
        }
    }

    #[test]
    fn mixed_state_correlator_can_leave_the_interval_for_general_axes() {
        // generic axes are not covered by the positivity argument
        let u = Direction::new(0.61405272, -0.62501907, -0.42764281);
        let a0 = Direction::new(-0.61175847, 0.77168995, -0.17391432)
            .normalized()
            .unwrap();
        let a1 = Direction::new(-0.64615356, 0.76239227, -0.0352648)
            .normalized()
            .unwrap();
        let c = mixed_state_correlator(u, a0, a1).unwrap();
        let iv = positivity_interval(u, a0, a1).unwrap();
        assert!(c < iv.lo);
    }

    #[test]
    fn alpha_family_is_positive_with_an_axis_along_u() {
        let mut rng = seeded_rng(13, 0);
        for _ in 0..500 {
            let u = random_in_ball(&mut rng);
            let Some(uhat) = u.normalized() else { continue };
            let a = random_unit(&mut rng);
            let alpha = random_correlator(&mut rng);
            let c = alpha_family_correlator(u, a, uhat, alpha).unwrap();
            assert!(positivity_interval(u, a, uhat).unwrap().contains(c, 1e-12));
        }
        assert!(alpha_family_correlator(Direction::ZERO, Direction::X, Direction::Y, 1.5).is_err());
    }

    #[test]
    fn frechet_pair_examples() {
        let uniform = lhv_pair_table(0.0, 0.0, 0.0).unwrap();
        let r = frechet_pair_check(&uniform).unwrap();
        assert!(r.frechet_holds && r.positive && r.equivalent);

        let u = Direction::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0);
        let neg =
            noncommuting_pair_table(u, Direction::X, Direction::Y, &CorrelatorSpec::pair(0.0))
                .unwrap();
        let r = frechet_pair_check(&neg).unwrap();
        assert!(!r.frechet_holds && !r.positive && r.equivalent);
        // lower bound at (+,+) is the one broken: it equals p(-,-) ≥ 0
        assert!(!r.tuples[0].lower_ok);
    }

    #[test]
    fn frechet_pair_rejects_triples() {
        let t = noncommuting_triple_table(
            Direction::ZERO,
            [Direction::X, Direction::Y, Direction::Z],
            &CorrelatorSpec::triple(0.0, 0.0, 0.0, 0.0),
        )
        .unwrap();
        assert!(matches!(
            frechet_pair_check(&t),
            Err(QuasiBellError::WrongArity { .. })
        ));
    }

    #[test]
    fn frechet_pair_equivalence_on_random_tables() {
        let mut rng = seeded_rng(7, 0);
        let (mut pos, mut neg) = (0, 0);
        for _ in 0..500 {
            let u = random_in_ball(&mut rng);
            let (a0, a1) = (random_unit(&mut rng), random_unit(&mut rng));
            let c = CorrelatorSpec::pair(random_correlator(&mut rng));
            let t = noncommuting_pair_table(u, a0, a1, &c).unwrap();
            let r = frechet_pair_check(&t).unwrap();
            assert!(r.equivalent, "{t:?}");
            if r.positive {
                pos += 1;
            } else {
                neg += 1;
            }
        }
        // both branches of the equivalence are exercised
        assert!(pos > 20 && neg > 20, "{pos} {neg}");
    }

    fn pairs_of(t: &OutcomeTable) -> [OutcomeTable; 3] {
        [t.marginalize(2), t.marginalize(1), t.marginalize(0)]
    }

    #[test]
    fn triple_table_uniform_and_marginals() {
        let dirs = [Direction::X, Direction::Y, Direction::Z];
        let t = noncommuting_triple_table(
            Direction::ZERO,
            dirs,
            &CorrelatorSpec::triple(0.0, 0.0, 0.0, 0.0),
        )
        .unwrap();
        assert_entries(&t, &[0.125; 8], 1e-15);

        let mut rng = seeded_rng(3, 0);
        for _ in 0..100 {
            let u = random_in_ball(&mut rng);
            let dirs = [
                random_unit(&mut rng),
                random_unit(&mut rng),
                random_unit(&mut rng),
            ];
            let c: Vec<f64> = (0..4).map(|_| random_correlator(&mut rng)).collect();
            let spec = CorrelatorSpec::triple(c[0], c[1], c[2], c[3]);
            let t = noncommuting_triple_table(u, dirs, &spec).unwrap();
            assert_marginals(&t);
            for (pair, (i, j)) in pairs_of(&t).iter().zip([(0, 1), (0, 2), (1, 2)]) {
                let direct = noncommuting_pair_table(
                    u,
                    dirs[i],
                    dirs[j],
                    &CorrelatorSpec::pair(spec.triple_pair(i, j)),
                )
                .unwrap();
                assert!(pair.max_abs_diff(&direct) < 1e-10);
            }
        }
    }

    #[test]
    fn pure_state_independence_is_positive() {
        let mut rng = seeded_rng(4, 0);
        for _ in 0..100 {
            let u = random_unit(&mut rng);
            let dirs = [
                random_unit(&mut rng),
                random_unit(&mut rng),
                random_unit(&mut rng),
            ];
            let t = noncommuting_triple_table(u, dirs, &CorrelatorSpec::independence(u, &dirs))
                .unwrap();
            assert!(t.min_entry() >= -1e-12);
            let p = pairs_of(&t);
            let r = frechet_triple_check(&t, [&p[0], &p[1], &p[2]]).unwrap();
            assert!(r.lower_holds && r.upper_holds && r.positive);
        }
    }

    #[test]
    fn frechet_triple_on_random_correlators() {
        let mut rng = seeded_rng(8, 0);
        let mut lower_strictly_weaker = 0;
        for _ in 0..500 {
            let u = random_in_ball(&mut rng);
            let dirs = [
                random_unit(&mut rng),
                random_unit(&mut rng),
                random_unit(&mut rng),
            ];
            let c: Vec<f64> = (0..4).map(|_| random_correlator(&mut rng)).collect();
            let t =
                noncommuting_triple_table(u, dirs, &CorrelatorSpec::triple(c[0], c[1], c[2], c[3]))
                    .unwrap();
            let p = pairs_of(&t);
            let r = frechet_triple_check(&t, [&p[0], &p[1], &p[2]]).unwrap();
            assert!(
                r.upper_equivalent && r.lower_implied && r.rewritten_consistent,
                "{r:?}"
            );
            if r.lower_holds && !r.positive {
                lower_strictly_weaker += 1;
            }
        }
        assert!(lower_strictly_weaker > 0);
    }

    #[test]
    fn frechet_triple_rejects_inconsistent_pairs() {
        let dirs = [Direction::X, Direction::Y, Direction::Z];
        let t = noncommuting_triple_table(
            Direction::ZERO,
            dirs,
            &CorrelatorSpec::triple(0.1, 0.0, 0.0, 0.0),
        )
        .unwrap();
        let mut p = pairs_of(&t);
        p[0].entries[0] += 1e-3;
        assert!(matches!(
            frechet_triple_check(&t, [&p[0], &p[1], &p[2]]),
            Err(QuasiBellError::InconsistentMarginals { pair: 0, .. })
        ));
    }
}
