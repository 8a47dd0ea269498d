//! Seeded random instances: axes uniform on the sphere, Bloch vectors uniform
//! in the ball, correlators uniform in `[-1, 1]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::direction::Direction;

/// Deterministic generator for `(seed, stream)`. Independent streams let
/// restarts or workers draw without sharing state.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform on the unit sphere (Archimedes: `z` uniform in `[-1, 1]`).
pub fn random_unit<R: Rng + ?Sized>(rng: &mut R) -> Direction {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..core::f64::consts::TAU);
    let r = libm::sqrt((1.0 - z * z).max(0.0));
    Direction::new(r * libm::cos(phi), r * libm::sin(phi), z)
}

/// Uniform in the closed unit ball.
pub fn random_in_ball<R: Rng + ?Sized>(rng: &mut R) -> Direction {
    let radius = libm::cbrt(rng.random::<f64>());
    random_unit(rng) * radius
}

/// Uniform in `[-1, 1]`.
pub fn random_correlator<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random_range(-1.0..=1.0)
}

/// `±1` with equal probability.
pub fn random_sign<R: Rng + ?Sized>(rng: &mut R) -> i8 {
    if rng.random::<bool>() {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = random_unit(&mut seeded_rng(7, 0));
        let b = random_unit(&mut seeded_rng(7, 0));
        let c = random_unit(&mut seeded_rng(7, 1));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn sphere_samples_are_unit_and_centred() {
        let mut rng = seeded_rng(1, 0);
        let mut mean = Direction::ZERO;
        let n = 20_000;
        for _ in 0..n {
            let d = random_unit(&mut rng);
            assert!((d.norm() - 1.0).abs() < 1e-12);
            mean = mean + d;
        }
        assert!((mean * (1.0 / n as f64)).norm() < 0.03);
    }

    #[test]
    fn ball_samples_stay_inside() {
        let mut rng = seeded_rng(2, 0);
        let inside_half = (0..10_000)
            .map(|_| random_in_ball(&mut rng).norm())
            .inspect(|r| assert!(*r <= 1.0))
            .filter(|r| *r <= 0.5)
            .count();
        // P(|u| <= 1/2) = 1/8
        assert!((inside_half as f64 / 10_000.0 - 0.125).abs() < 0.02);
    }
}
