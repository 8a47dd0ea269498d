//! Restarts and enumerations spread over a rayon pool.
//!
//! Work items are independent and reduced deterministically, so results do
//! not depend on the number of workers.

use quasibell_core::optimizer::{finish, run_restart, OptimizationResult, OptimizeConfig};
use quasibell_core::quasi_bell::{
    assignment_count, classical_bound_partial, merge_reports, ClassicalBoundReport,
};
use quasibell_core::{QuasiBellError, Result};
use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

/// Pool with `jobs` workers, or rayon's default when `None`.
pub fn pool(jobs: Option<usize>) -> ThreadPool {
    let mut b = ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        b = b.num_threads(n.max(1));
    }
    b.build().expect("thread pool")
}

/// [`quasibell_core::optimizer::maximize`] with restarts run concurrently.
pub fn maximize(
    order: usize,
    cfg: &OptimizeConfig,
    pool: &ThreadPool,
) -> Result<OptimizationResult> {
    let outcomes = pool.install(|| {
        (0..cfg.restarts.max(1))
            .into_par_iter()
            .map(|r| run_restart(order, cfg, r))
            .collect()
    });
    finish(order, cfg, outcomes)
}

/// [`quasibell_core::quasi_bell::classical_bound_verify`] split over Bob's
/// assignments.
pub fn classical_bound_verify(
    order: usize,
    cap: u64,
    pool: &ThreadPool,
) -> Result<ClassicalBoundReport> {
    let required = assignment_count(order)
        .filter(|_| order <= 30)
        .unwrap_or(u64::MAX);
    if required > cap {
        return Err(QuasiBellError::EnumerationTooLarge { required, cap });
    }
    let per_party = 1u64 << (order + 1);
    let chunk = (per_party / 64).max(1);
    let parts: Vec<ClassicalBoundReport> = pool.install(|| {
        (0..per_party.div_ceil(chunk))
            .into_par_iter()
            .map(|c| classical_bound_partial(order, c * chunk..(c + 1) * chunk))
            .collect::<Result<_>>()
    })?;
    Ok(merge_reports(&parts).expect("at least one chunk"))
}
