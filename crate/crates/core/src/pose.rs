use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Wraps an angle into the canonical range `(-pi, pi]`.
///
/// Ties at `±pi` resolve to `+pi`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut v = a.rem_euclid(2.0 * PI);
    if v > PI {
        v -= 2.0 * PI;
    }
    // rem_euclid can return exactly 2*pi for tiny negative inputs
    if v <= -PI {
        v += 2.0 * PI;
    }
    v
}

/// A configuration of the car: planar position and heading on `R^2 x S^1`.
///
/// The heading is always stored canonicalized to `(-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: wrap_angle(theta),
        }
    }

    pub fn origin() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    #[inline]
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn set_theta(&mut self, theta: f64) {
        self.theta = wrap_angle(theta);
    }

    /// Euclidean distance between the planar projections.
    #[inline]
    pub fn planar_distance(&self, other: &Pose) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Multiplies the position by `k`, keeping the heading.
    pub fn scaled(&self, k: f64) -> Pose {
        Pose::new(self.x * k, self.y * k, self.theta)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite()
    }
}

impl From<[f64; 3]> for Pose {
    fn from(v: [f64; 3]) -> Self {
        Pose::new(v[0], v[1], v[2])
    }
}

impl From<Pose> for [f64; 3] {
    fn from(p: Pose) -> Self {
        [p.x, p.y, p.theta]
    }
}
