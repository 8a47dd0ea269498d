use core::ops::{Add, Mul, Neg, Sub};

use crate::error::{QuasiBellError, Result};
use crate::tolerance;

/// A real 3-vector: a measurement axis, a Bloch vector, or the vector part of a
/// symmetrized product. Unit norm is only enforced where an operation needs it.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(from = "[f64; 3]", into = "[f64; 3]"))]
pub struct Direction {
    /// x component.
    pub x: f64,
    /// y component.
    pub y: f64,
    /// z component.
    pub z: f64,
}

impl Direction {
    /// The zero vector.
    pub const ZERO: Direction = Direction::new(0.0, 0.0, 0.0);
    /// Unit x axis.
    pub const X: Direction = Direction::new(1.0, 0.0, 0.0);
    /// Unit y axis.
    pub const Y: Direction = Direction::new(0.0, 1.0, 0.0);
    /// Unit z axis.
    pub const Z: Direction = Direction::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Builds a unit direction, rejecting vectors whose norm is off by more than
    /// [`tolerance::UNIT_NORM`].
    pub fn unit(x: f64, y: f64, z: f64) -> Result<Self> {
        let d = Self::new(x, y, z);
        d.require_unit()?;
        Ok(d)
    }

    /// Rescales `self` to unit length. Returns `None` for the zero vector.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            None
        } else {
            Some(self * (1.0 / n))
        }
    }

    /// Unit vector at polar angle `theta` and azimuth `phi`.
    pub fn from_spherical(theta: f64, phi: f64) -> Self {
        let (st, ct) = (libm::sin(theta), libm::cos(theta));
        let (sp, cp) = (libm::sin(phi), libm::cos(phi));
        Self::new(st * cp, st * sp, ct)
    }

    /// `(theta, phi)` with `theta` in `[0, π]` and `phi` in `(-π, π]`.
    pub fn to_spherical(self) -> (f64, f64) {
        let r = self.norm();
        let theta = libm::acos((self.z / r).clamp(-1.0, 1.0));
        let phi = libm::atan2(self.y, self.x);
        (theta, phi)
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Self) -> Self {
        Self::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        libm::sqrt(self.norm_squared())
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Largest absolute component of `self - other`.
    pub fn max_abs_diff(self, other: Self) -> f64 {
        let d = self - other;
        d.x.abs().max(d.y.abs()).max(d.z.abs())
    }

    pub(crate) fn require_unit(self) -> Result<()> {
        let norm = self.norm();
        if (norm - 1.0).abs() > tolerance::UNIT_NORM || !norm.is_finite() {
            return Err(QuasiBellError::NonUnitDirection { norm });
        }
        Ok(())
    }

    pub(crate) fn require_in_ball(self) -> Result<()> {
        let norm = self.norm();
        if norm > 1.0 + tolerance::BLOCH_BALL || !norm.is_finite() {
            return Err(QuasiBellError::BlochOutOfBall { norm });
        }
        Ok(())
    }
}

impl From<[f64; 3]> for Direction {
    fn from(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

impl From<Direction> for [f64; 3] {
    fn from(d: Direction) -> Self {
        d.to_array()
    }
}

impl Add for Direction {
    type Output = Direction;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Direction {
    type Output = Direction;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Neg for Direction {
    type Output = Direction;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Direction {
    type Output = Direction;
    fn mul(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl core::iter::Sum for Direction {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Direction::ZERO, Add::add)
    }
}
