//! Sub-Riemannian structure of the Reeds-Shepp car.
//!
//! The control fields are `g1 = (cos θ, sin θ, 0)` (drive) and `g2 = (0, 0, 1)`
//! (steer); their bracket `[g1, g2] = (sin θ, -cos θ, 0)` completes the frame.
//! Coordinates along `g1, g2` carry weight 1 and the bracket direction weight 2,
//! so the homogeneous dimension is `D = 4`.

use crate::error::{invalid, Result};
use crate::pose::{wrap_angle, Pose};

/// Coordinate weights `(w1, w2, w3)`.
pub const WEIGHTS: [u32; 3] = [1, 1, 2];

/// Homogeneous dimension `D = w1 + w2 + w3`.
pub const HOMOGENEOUS_DIM: u32 = 4;

/// Frame coordinates of one pose relative to a base pose.
///
/// `z1` runs along the heading of the base, `z2` is the heading difference and
/// `z3` runs along the bracket direction (lateral, pointing to the right).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivCoords {
    pub z1: f64,
    pub z2: f64,
    pub z3: f64,
}

impl PrivCoords {
    pub fn new(z1: f64, z2: f64, z3: f64) -> Self {
        Self { z1, z2, z3 }
    }

    /// Weighted dilation `(t z1, t z2, t^2 z3)`.
    pub fn dilate(&self, t: f64) -> Self {
        Self::new(t * self.z1, t * self.z2, t * t * self.z3)
    }
}

/// Ball-box constants `a_min ≤ a(x) ≤ A(x) ≤ A_max`, valid for `d < sigma_min`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallBoxConstants {
    pub a_min: f64,
    pub a_max: f64,
    pub sigma_min: f64,
    /// Largest coordinate weight (the step of the distribution).
    pub s: u32,
}

pub fn privileged_coords(base: &Pose, target: &Pose) -> PrivCoords {
    let dx = target.x - base.x;
    let dy = target.y - base.y;
    let (s, c) = base.theta().sin_cos();
    PrivCoords {
        z1: c * dx + s * dy,
        z2: wrap_angle(target.theta() - base.theta()),
        z3: s * dx - c * dy,
    }
}

/// `max(|z1|, |z2|, |z3|^(1/2))`.
pub fn pseudonorm(z: &PrivCoords) -> f64 {
    z.z1.abs().max(z.z2.abs()).max(z.z3.abs().sqrt())
}

/// Whether `target` lies in the weighted box of size `r` centred at `base`.
pub fn in_box(base: &Pose, target: &Pose, r: f64) -> bool {
    pseudonorm(&privileged_coords(base, target)) <= r
}

/// Normalised weighted-box volume `r^D`.
///
/// The box `{pseudonorm ≤ r}` has Lebesgue volume `8 r^D` in `(z1, z2, z3)`;
/// the constant factor is absorbed by the radius tuning parameter.
pub fn box_volume(r: f64, dim: u32) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(invalid(format!("box radius must be nonnegative, got {r}")));
    }
    if dim == 0 {
        return Err(invalid("homogeneous dimension must be positive"));
    }
    Ok(r.powi(dim as i32))
}

/// Connection radius
/// `r_n = 4 A_max (1+η)^(1/D) (μ_free / D)^(1/D) (log n / n)^(1/D)`.
pub fn connection_radius(n: usize, eta: f64, mu_free: f64, dim: u32, a_max: f64) -> Result<f64> {
    if n < 2 {
        return Err(invalid(format!("connection radius needs n >= 2, got {n}")));
    }
    if !(eta >= 0.0) {
        return Err(invalid(format!("eta must be nonnegative, got {eta}")));
    }
    if !(mu_free > 0.0) || !(a_max > 0.0) || dim == 0 {
        return Err(invalid("mu_free, A_max and D must be positive"));
    }
    let d = dim as f64;
    let nf = n as f64;
    Ok(4.0 * a_max * (1.0 + eta).powf(1.0 / d) * (mu_free / d).powf(1.0 / d) * (nf.ln() / nf).powf(1.0 / d))
}

/// Ball-box constants of the unit-speed Reeds-Shepp car with turning radius `R`.
pub fn rs_constants(turning_radius: f64) -> Result<BallBoxConstants> {
    if !(turning_radius > 0.0) || !turning_radius.is_finite() {
        return Err(invalid(format!(
            "turning radius must be positive and finite, got {turning_radius}"
        )));
    }
    let a_min = (2.0 * turning_radius).sqrt();
    Ok(BallBoxConstants {
        a_min,
        a_max: 2.0 * a_min,
        sigma_min: turning_radius,
        s: 2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn frame_coordinates() {
        let z = privileged_coords(&Pose::origin(), &Pose::origin());
        assert_eq!((z.z1, z.z2, z.z3), (0.0, 0.0, 0.0));

        let z = privileged_coords(&Pose::origin(), &Pose::new(1.0, 2.0, 0.5));
        assert_eq!((z.z1, z.z2, z.z3), (1.0, 0.5, -2.0));

        let z = privileged_coords(&Pose::new(0.0, 0.0, PI / 2.0), &Pose::new(0.0, 1.0, PI / 2.0));
        assert!((z.z1 - 1.0).abs() < 1e-15);
        assert_eq!(z.z2, 0.0);
        assert!(z.z3.abs() < 1e-15);
    }

    #[test]
    fn heading_difference_wraps() {
        let z = privileged_coords(&Pose::new(0.0, 0.0, 3.0), &Pose::new(0.0, 0.0, -3.0));
        assert!((z.z2 - (2.0 * PI - 6.0)).abs() < 1e-12);
        let z = privileged_coords(&Pose::new(0.0, 0.0, 0.0), &Pose::new(0.0, 0.0, PI));
        assert_eq!(z.z2, PI);
    }

    #[test]
    fn pseudonorm_examples() {
        assert_eq!(pseudonorm(&PrivCoords::new(0.0, 0.0, 0.0)), 0.0);
        assert!((pseudonorm(&PrivCoords::new(0.2, -0.1, 0.09)) - 0.3).abs() < 1e-15);
        assert_eq!(pseudonorm(&PrivCoords::new(1.0, 0.0, 0.0)), 1.0);
    }

    #[test]
    fn box_volume_examples() {
        assert_eq!(box_volume(1.0, 4).unwrap(), 1.0);
        assert_eq!(box_volume(0.5, 4).unwrap(), 0.0625);
        assert_eq!(box_volume(0.0, 4).unwrap(), 0.0);
        assert!(box_volume(-1.0, 4).is_err());
    }

    #[test]
    #[allow(clippy::excessive_precision)]
    fn connection_radius_golden() {
        // 4 (ln 16 / 16)^(1/4), evaluated at 40 digits with mpmath
        let r = connection_radius(16, 0.0, 4.0, 4, 1.0).unwrap();
        assert!((r - 2.580_782_224_299_753_3).abs() < 1e-14, "{r}");
        let r = connection_radius(1000, 0.0, 4.0, 4, 1.0).unwrap();
        assert!((r - 1.153_172_367_434_846_2).abs() < 1e-14, "{r}");
    }

    #[test]
    fn connection_radius_rejects_small_n() {
        assert!(connection_radius(0, 0.0, 1.0, 4, 1.0).is_err());
        assert!(connection_radius(1, 0.0, 1.0, 4, 1.0).is_err());
        assert!(connection_radius(2, -0.1, 1.0, 4, 1.0).is_err());
    }

    #[test]
    fn connection_radius_shape() {
        let mut prev = f64::INFINITY;
        for n in 3..5000 {
            let r = connection_radius(n, 0.0, 10.0, 4, 1.3).unwrap();
            assert!(r < prev);
            prev = r;
        }
        let a = connection_radius(500, 0.3, 7.0, 4, 1.0).unwrap();
        let b = connection_radius(500, 0.3, 7.0, 4, 2.0).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-12);
    }

    #[test]
    fn rs_constant_examples() {
        let c = rs_constants(1.0).unwrap();
        assert!((c.a_min - 2f64.sqrt()).abs() < 1e-15);
        assert!((c.a_max - 2.0 * 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(c.sigma_min, 1.0);
        assert_eq!(c.s, 2);
        let c = rs_constants(0.5).unwrap();
        assert_eq!((c.a_min, c.a_max, c.sigma_min), (1.0, 2.0, 0.5));
        for r in [0.01, 0.3, 2.0, 17.0] {
            let c = rs_constants(r).unwrap();
            assert!((c.a_max / c.a_min - 2.0).abs() < 1e-15);
        }
        assert!(rs_constants(0.0).is_err());
        assert!(rs_constants(-1.0).is_err());
    }

    proptest! {
        #[test]
        fn pseudonorm_is_homogeneous(
            z1 in -5.0f64..5.0, z2 in -3.0f64..3.0, z3 in -5.0f64..5.0, t in 0.0f64..=1.0
        ) {
            let z = PrivCoords::new(z1, z2, z3);
            let lhs = pseudonorm(&z.dilate(t));
            prop_assert!((lhs - t * pseudonorm(&z)).abs() <= 1e-12 * (1.0 + lhs));
        }

        #[test]
        fn box_membership_matches_pseudonorm(
            x in -2.0f64..2.0, y in -2.0f64..2.0, th in -3.1f64..3.1,
            bth in -3.1f64..3.1, r in 0.01f64..2.0
        ) {
            let base = Pose::new(0.3, -0.2, bth);
            let p = Pose::new(x, y, th);
            let z = privileged_coords(&base, &p);
            let inside = z.z1.abs() <= r && z.z2.abs() <= r && z.z3.abs() <= r * r;
            prop_assert_eq!(inside, in_box(&base, &p, r));
        }
    }
}
