//! The acceptance criteria, one check per criterion.
//!
//! Shared by `quasibell selftest` and the `acceptance` test target. Each
//! check reports pass/fail, a one-line summary of what was measured, and
//! its wall time; runtime budgets are part of the pass condition.

use std::time::{Duration, Instant};

use quasibell_core::optimizer::{local_stationarity_check, Ansatz, OptimizeConfig};
use quasibell_core::pauli::Outcome;
use quasibell_core::quasi_bell::{
    classical_bound_verify, table1, QuasiBellInstance, DEFAULT_ENUMERATION_CAP,
};
use quasibell_core::sampling::{random_unit, seeded_rng};
use quasibell_core::symmetrize::{
    moyal_product_operator, symmetrize_bruteforce, symmetrize_pairing, symmetrize_triple,
    symmetrized_pair_joint_table, ProductSpec, DEFAULT_MOYAL_STEP,
};
use quasibell_core::werner::{violation_threshold, violation_threshold_bisection};
use quasibell_core::Direction;
use rayon::ThreadPool;
use serde::Serialize;

use crate::parallel;
use crate::properties::{pair_frechet_run, pure_collapse_run, triple_frechet_run};

/// Largest optimum reported for each order `0..=10`.
pub const TABLE3: [f64; 11] = [
    1.0, 1.414, 1.5, 1.432, 1.469, 1.443, 1.467, 1.45, 1.467, 1.455, 1.469,
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "{} [{:>2}] {}: {} ({:.2?})",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail,
            self.elapsed
        )
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Options {
    /// Also optimize orders 7–10.
    pub extended: bool,
    pub jobs: Option<usize>,
}

fn timed(
    id: u8,
    title: &'static str,
    budget: Duration,
    f: impl FnOnce() -> (bool, String),
) -> CriterionResult {
    let start = Instant::now();
    let (ok, detail) = f();
    let elapsed = start.elapsed();
    let within = elapsed <= budget;
    let detail = if within {
        detail
    } else {
        format!("{detail}; over the {budget:?} budget")
    };
    CriterionResult {
        id,
        title,
        passed: ok && within,
        detail,
        elapsed,
    }
}

pub fn chsh() -> CriterionResult {
    timed(1, "CHSH reproduction", Duration::from_secs(1), || {
        let q = QuasiBellInstance::chsh().quantum_value();
        let dev = (q.abs() - std::f64::consts::SQRT_2).abs();
        let r = classical_bound_verify(1, DEFAULT_ENUMERATION_CAP).expect("order 1 enumerates");
        let ok = dev < 1e-9 && r.certified() && r.assignments == 16;
        (
            ok,
            format!(
                "|value| = {:.12} (dev {dev:.1e}); classical min {} max {} over {}",
                q.abs(),
                r.min,
                r.max,
                r.assignments
            ),
        )
    })
}

pub fn order2_headline() -> CriterionResult {
    timed(2, "order-2 headline", Duration::from_secs(1), || {
        let inst = QuasiBellInstance::order2_optimum();
        let q = inst.quantum_value();
        let (alpha, beta) = inst.per_index_vectors();
        let expect = [[-1.0, -0.5, -0.5], [-0.5, 0.5, -1.0], [-0.5, -1.0, 0.5]];
        let gram_dev = inst
            .inner_products()
            .iter()
            .zip(expect)
            .flat_map(|(row, e)| {
                row.iter()
                    .zip(e)
                    .map(|(x, y)| (x - y).abs())
                    .collect::<Vec<_>>()
            })
            .fold(0.0, f64::max);
        let ok = (q - 1.5).abs() < 1e-12
            && alpha[3].norm() < 1e-12
            && beta[3].norm() < 1e-12
            && gram_dev < 1e-12;
        (
            ok,
            format!(
                "value {q:.15}, |a_012| {:.1e}, |b_012| {:.1e}, inner-product dev {gram_dev:.1e}",
                alpha[3].norm(),
                beta[3].norm()
            ),
        )
    })
}

pub fn table_one() -> CriterionResult {
    timed(3, "test-expression grid", Duration::from_secs(1), || {
        let expect = [
            [4, 0, 0, 0, 0, 0, 0, -4],
            [0, 0, 4, 0, 0, -4, 0, 0],
            [0, 4, 0, 0, 0, 0, -4, 0],
            [0, 0, 0, 4, -4, 0, 0, 0],
        ];
        let got = table1();
        let single = (0..8).all(|c| got.iter().filter(|r| r[c] != 0).count() == 1);
        (got == expect && single, format!("{got:?}"))
    })
}

pub fn classical_certificate(pool: &ThreadPool) -> CriterionResult {
    timed(4, "classical certificate", Duration::from_secs(30), || {
        let mut total = 0;
        let mut ok = true;
        for order in 0..=8 {
            match parallel::classical_bound_verify(order, DEFAULT_ENUMERATION_CAP, pool) {
                Ok(r) => {
                    ok &= r.certified();
                    total += r.assignments;
                }
                Err(_) => ok = false,
            }
        }
        (
            ok,
            format!("K_N = ±1 on all {total} assignments for N = 0..=8"),
        )
    })
}

fn table3_rows(orders: &[usize], tol: f64, pool: &ThreadPool) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for &n in orders {
        let cfg = OptimizeConfig {
            restarts: 64,
            seed: 1,
            ansatz: Ansatz::Reduced,
            ..OptimizeConfig::for_order(n)
        };
        match parallel::maximize(n, &cfg, pool) {
            Ok(r) => {
                let v = r.best_value.abs();
                ok &= (v - TABLE3[n]).abs() <= tol;
                parts.push(format!("N={n}: {v:.4}"));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("N={n}: {e}"));
            }
        }
    }
    (ok, parts.join(", "))
}

pub fn table_three(pool: &ThreadPool) -> CriterionResult {
    timed(
        5,
        "optimized values N=1..6",
        Duration::from_secs(300),
        || table3_rows(&[1, 2, 3, 4, 5, 6], 0.005, pool),
    )
}

pub fn table_three_extended(pool: &ThreadPool) -> CriterionResult {
    timed(
        5,
        "optimized values N=7..10 (extended)",
        Duration::from_secs(900),
        || table3_rows(&[7, 8, 9, 10], 0.01, pool),
    )
}

pub fn negative_probability() -> CriterionResult {
    timed(
        6,
        "negative joint quasi-probability",
        Duration::from_secs(1),
        || {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let t =
                symmetrized_pair_joint_table(Direction::new(s, s, 0.0), Direction::X, Direction::Y)
                    .expect("valid axes");
            let p = t.get(&[Outcome::Minus, Outcome::Minus]);
            let dev = (p - (1.0 - std::f64::consts::SQRT_2) / 4.0).abs();
            (dev < 1e-12, format!("p(-,-) = {p:.12} (dev {dev:.1e})"))
        },
    )
}

pub fn werner_thresholds() -> CriterionResult {
    timed(7, "Werner thresholds", Duration::from_secs(1), || {
        let t2 = violation_threshold(&QuasiBellInstance::order2_optimum()).expect("violates");
        let t1 = violation_threshold(&QuasiBellInstance::chsh()).expect("violates");
        let b2 =
            violation_threshold_bisection(&QuasiBellInstance::order2_optimum()).expect("violates");
        let d2 = (t2 - 2.0 / 3.0).abs();
        let d1 = (t1 - std::f64::consts::FRAC_1_SQRT_2).abs();
        let ok = d2 < 1e-9 && d1 < 1e-9 && (b2 - t2).abs() < 1e-9;
        (
            ok,
            format!("N=2: {t2:.12} (dev {d2:.1e}), N=1: {t1:.12} (dev {d1:.1e})"),
        )
    })
}

pub fn moyal_equivalence() -> CriterionResult {
    timed(
        8,
        "characteristic-function route",
        Duration::from_secs(10),
        || {
            let mut rng = seeded_rng(8, 0);
            let (mut worst, mut worst_scalar) = (0.0f64, 0.0f64);
            for _ in 0..20 {
                let d = [
                    random_unit(&mut rng),
                    random_unit(&mut rng),
                    random_unit(&mut rng),
                ];
                let spec = ProductSpec::new(d.to_vec()).expect("unit axes");
                let m = moyal_product_operator(&spec, DEFAULT_MOYAL_STEP).expect("k = 3");
                let exact = symmetrize_triple(d[0], d[1], d[2])
                    .expect("unit axes")
                    .to_operator();
                worst = worst.max(m.matrix.max_abs_diff(&exact));
                worst_scalar = worst_scalar.max(m.operator.scalar.abs());
            }
            (
                worst < 1e-5 && worst_scalar < 1e-6,
                format!("max entry dev {worst:.1e}, max scalar part {worst_scalar:.1e}"),
            )
        },
    )
}

pub fn oracle_chain() -> CriterionResult {
    timed(
        9,
        "symmetrization oracle chain",
        Duration::from_secs(60),
        || {
            let mut rng = seeded_rng(9, 0);
            let mut worst = 0.0f64;
            let mut parity_ok = true;
            for k in 2..=7 {
                for _ in 0..100 {
                    let dirs: Vec<Direction> = (0..k).map(|_| random_unit(&mut rng)).collect();
                    let spec = ProductSpec::new(dirs).expect("unit axes");
                    let brute = symmetrize_bruteforce(&spec, false).expect("k <= 9");
                    let pairing = symmetrize_pairing(&spec).expect("k small");
                    worst = worst.max(brute.max_abs_diff(&pairing));
                    parity_ok &= if k % 2 == 0 {
                        brute.vector.norm() < 1e-10 && pairing.vector.norm() == 0.0
                    } else {
                        brute.scalar.abs() < 1e-10 && pairing.scalar == 0.0
                    };
                }
            }
            (
                worst < 1e-10 && parity_ok,
                format!(
                    "600 instances, max dev {worst:.1e}, parity {}",
                    if parity_ok { "ok" } else { "broken" }
                ),
            )
        },
    )
}

pub fn property_suites() -> CriterionResult {
    timed(
        10,
        "joint-distribution property suites",
        Duration::from_secs(60),
        || {
            let pair = pair_frechet_run(500, 7).expect("valid draws");
            let triple = triple_frechet_run(500, 7).expect("valid draws");
            let pure = pure_collapse_run(100, 7).expect("valid draws");
            let ok = pair.counterexamples == 0
                && triple.counterexamples() == 0
                && triple.lower_strictly_weaker > 0
                && pure.max_width < 1e-9
                && pure.max_deviation < 1e-9;
            (
            ok,
            format!(
                "pair {}/{} equivalent; triple upper {} / lower {} counterexamples, {} lower-only; pure collapse dev {:.1e}",
                pair.instances - pair.counterexamples,
                pair.instances,
                triple.upper_counterexamples,
                triple.lower_counterexamples,
                triple.lower_strictly_weaker,
                pure.max_deviation.max(pure.max_width)
            ),
        )
        },
    )
}

pub fn stationarity() -> CriterionResult {
    timed(
        11,
        "stationarity at the order-2 optimum",
        Duration::from_secs(10),
        || {
            let r = local_stationarity_check(&QuasiBellInstance::order2_optimum());
            (
                r.gradient_norm < 1e-6,
                format!(
                    "gradient norm {:.1e}, max curvature {:.1e}",
                    r.gradient_norm,
                    r.max_curvature()
                ),
            )
        },
    )
}

/// Every criterion in order; the extended optimization run is appended when requested.
pub fn run_all(opts: Options) -> Vec<CriterionResult> {
    let pool = parallel::pool(opts.jobs);
    let mut out = vec![
        chsh(),
        order2_headline(),
        table_one(),
        classical_certificate(&pool),
        table_three(&pool),
        negative_probability(),
        werner_thresholds(),
        moyal_equivalence(),
        oracle_chain(),
        property_suites(),
        stationarity(),
    ];
    if opts.extended {
        out.push(table_three_extended(&pool));
    }
    out
}
