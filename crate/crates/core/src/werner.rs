//! Werner states `ρ(z) = (1 - z) I/4 + z |ψ⟩⟨ψ|`.
//!
//! Every singlet correlator scales by `z`, so `⟨K_N⟩_z = z ⟨K_N⟩` and the
//! classical bound is first exceeded at `z = 1/|⟨K_N⟩|`.

use alloc::vec::Vec;

use crate::error::{QuasiBellError, Result};
use crate::quasi_bell::{werner_value, QuasiBellInstance};

const BISECTION_TOL: f64 = 1e-12;

/// Smallest `z` at which `|⟨K_N⟩_z|` reaches the classical bound 1.
pub fn violation_threshold(inst: &QuasiBellInstance) -> Result<f64> {
    let value = inst.quantum_value().abs();
    if value <= 1.0 {
        return Err(QuasiBellError::NoViolation { value });
    }
    Ok(1.0 / value)
}

/// [`violation_threshold`] found by bisecting `|werner_value(z)| - 1` on `[0, 1]`.
pub fn violation_threshold_bisection(inst: &QuasiBellInstance) -> Result<f64> {
    let f = |z: f64| werner_value(inst, z).map(|v| v.abs() - 1.0);
    if f(1.0)? <= 0.0 {
        return Err(QuasiBellError::NoViolation {
            value: inst.quantum_value().abs(),
        });
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `|⟨K_N⟩_z|` over a grid of noise levels.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WernerSweep {
    pub order: usize,
    pub instance: QuasiBellInstance,
    pub z_grid: Vec<f64>,
    pub values: Vec<f64>,
    /// `None` when the instance never exceeds the classical bound.
    pub threshold: Option<f64>,
}

impl WernerSweep {
    /// `(z, value, value > 1)` rows.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, bool)> + '_ {
        self.z_grid
            .iter()
            .zip(&self.values)
            .map(|(&z, &v)| (z, v, v > 1.0))
    }
}

/// Evaluates `z |⟨K_N⟩|` at every grid point. Grid values must lie in `[0, 1]`.
pub fn sweep(inst: &QuasiBellInstance, grid: &[f64]) -> Result<WernerSweep> {
    let value = inst.quantum_value().abs();
    let values = grid
        .iter()
        .map(|&z| {
            if (0.0..=1.0).contains(&z) {
                Ok(z * value)
            } else {
                Err(QuasiBellError::OutOfRange {
                    what: "z",
                    value: z,
                    lo: 0.0,
                    hi: 1.0,
                })
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(WernerSweep {
        order: inst.order,
        instance: inst.clone(),
        z_grid: grid.to_vec(),
        values,
        threshold: violation_threshold(inst).ok(),
    })
}

/// `start, start + step, …` up to and including `stop` (within half a step).
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if step.is_nan()
        || step <= 0.0
        || !(0.0..=1.0).contains(&start)
        || !(start..=1.0).contains(&stop)
    {
        return Err(QuasiBellError::OutOfRange {
            what: "grid",
            value: step,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let n = libm::floor((stop - start) / step + 1e-9) as usize;
    Ok((0..=n)
        .map(|i| (start + i as f64 * step).min(stop))
        .collect())
}
