//! Seeded randomized checks of the joint-distribution invariants.

use quasibell_core::joint::{
    frechet_pair_check, frechet_triple_check, noncommuting_pair_table, noncommuting_triple_table,
    positivity_interval,
};
use quasibell_core::sampling::{random_correlator, random_in_ball, random_unit, seeded_rng};
use quasibell_core::{CorrelatorSpec, Result};
use serde::Serialize;

/// Two-observable tables with random Bloch vector, axes and correlator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairFrechetRun {
    pub instances: usize,
    /// Tables where Fréchet bounds and positivity disagree.
    pub counterexamples: usize,
    pub positive: usize,
    pub negative: usize,
}

pub fn pair_frechet_run(instances: usize, seed: u64) -> Result<PairFrechetRun> {
    let mut rng = seeded_rng(seed, 0);
    let mut run = PairFrechetRun {
        instances,
        counterexamples: 0,
        positive: 0,
        negative: 0,
    };
    for _ in 0..instances {
        let u = random_in_ball(&mut rng);
        let (a0, a1) = (random_unit(&mut rng), random_unit(&mut rng));
        let c = CorrelatorSpec::pair(random_correlator(&mut rng));
        let r = frechet_pair_check(&noncommuting_pair_table(u, a0, a1, &c)?)?;
        run.counterexamples += usize::from(!r.equivalent);
        if r.positive {
            run.positive += 1;
        } else {
            run.negative += 1;
        }
    }
    Ok(run)
}

/// Three-observable tables with random Bloch vector, axes and correlators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TripleFrechetRun {
    pub instances: usize,
    /// Upper bounds hold but the table is not positive, or vice versa.
    pub upper_counterexamples: usize,
    /// Positive tables that break a lower bound.
    pub lower_counterexamples: usize,
    /// Rewritten entry-sum forms disagree with the direct bounds.
    pub rewrite_mismatches: usize,
    /// Lower bounds hold although some entry is negative.
    pub lower_strictly_weaker: usize,
}

impl TripleFrechetRun {
    pub fn counterexamples(&self) -> usize {
        self.upper_counterexamples + self.lower_counterexamples + self.rewrite_mismatches
    }
}

pub fn triple_frechet_run(instances: usize, seed: u64) -> Result<TripleFrechetRun> {
    let mut rng = seeded_rng(seed, 1);
    let mut run = TripleFrechetRun {
        instances,
        upper_counterexamples: 0,
        lower_counterexamples: 0,
        rewrite_mismatches: 0,
        lower_strictly_weaker: 0,
    };
    for _ in 0..instances {
        let u = random_in_ball(&mut rng);
        let dirs = [
            random_unit(&mut rng),
            random_unit(&mut rng),
            random_unit(&mut rng),
        ];
        let c: Vec<f64> = (0..4).map(|_| random_correlator(&mut rng)).collect();
        let t =
            noncommuting_triple_table(u, dirs, &CorrelatorSpec::triple(c[0], c[1], c[2], c[3]))?;
        let pairs = [t.marginalize(2), t.marginalize(1), t.marginalize(0)];
        let r = frechet_triple_check(&t, [&pairs[0], &pairs[1], &pairs[2]])?;
        run.upper_counterexamples += usize::from(!r.upper_equivalent);
        run.lower_counterexamples += usize::from(!r.lower_implied);
        run.rewrite_mismatches += usize::from(!r.rewritten_consistent);
        run.lower_strictly_weaker += usize::from(r.lower_holds && !r.positive);
    }
    Ok(run)
}

/// Pure states with one axis along `±û`: the positivity interval must shrink
/// to the independent product `(â0·u)(â1·u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PureCollapseRun {
    pub instances: usize,
    pub max_width: f64,
    pub max_deviation: f64,
}

pub fn pure_collapse_run(instances: usize, seed: u64) -> Result<PureCollapseRun> {
    let mut rng = seeded_rng(seed, 2);
    let mut run = PureCollapseRun {
        instances,
        max_width: 0.0,
        max_deviation: 0.0,
    };
    for k in 0..instances {
        let u = random_unit(&mut rng);
        let other = random_unit(&mut rng);
        let along = if k % 2 == 0 { u } else { -u };
        // alternate which slot carries the aligned axis
        let (a0, a1) = if k % 4 < 2 {
            (along, other)
        } else {
            (other, along)
        };
        let iv = positivity_interval(u, a0, a1)?;
        let independent = a0.dot(u) * a1.dot(u);
        run.max_width = run.max_width.max(iv.width().abs());
        run.max_deviation = run
            .max_deviation
            .max((iv.lo - independent).abs())
            .max((iv.hi - independent).abs());
    }
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn runs_are_clean_and_reproducible() {
        let p = pair_frechet_run(200, 7).unwrap();
        assert_eq!(p.counterexamples, 0);
        assert!(p.positive > 0 && p.negative > 0);
        assert_eq!(p, pair_frechet_run(200, 7).unwrap());
        let t = triple_frechet_run(200, 7).unwrap();
        assert_eq!(t.counterexamples(), 0);
        let c = pure_collapse_run(50, 7).unwrap();
        assert!(c.max_width < 1e-9 && c.max_deviation < 1e-9);
    }
}
