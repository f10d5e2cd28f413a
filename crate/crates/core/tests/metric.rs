use std::f64::consts::PI;

use dcaplan_core::subriemannian::{privileged_coords, pseudonorm, rs_constants};
use dcaplan_core::{rs_distance, steer, wrap_angle, Pose};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pose() -> impl Strategy<Value = Pose> {
    (-5.0..5.0f64, -5.0..5.0f64, -PI..PI).prop_map(|(x, y, t)| Pose::new(x, y, t))
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 2000,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn symmetric_and_at_least_planar(a in pose(), b in pose(), r in 0.1..3.0f64) {
        let d = rs_distance(&a, &b, r);
        prop_assert!((d - rs_distance(&b, &a, r)).abs() <= 1e-9);
        prop_assert!(d >= a.planar_distance(&b) - 1e-12);
        // turning by Δθ takes at least R |Δθ| of arc
        prop_assert!(d >= r * wrap_angle(b.theta() - a.theta()).abs() - 1e-9);
    }

    #[test]
    fn triangle_inequality(a in pose(), b in pose(), c in pose()) {
        let ab = rs_distance(&a, &b, 1.0);
        let bc = rs_distance(&b, &c, 1.0);
        prop_assert!(rs_distance(&a, &c, 1.0) <= ab + bc + 1e-9);
    }

    #[test]
    fn distance_is_frame_invariant(a in pose(), b in pose(), shift in pose()) {
        // rigid motion applied to both poses
        let (s, c) = shift.theta().sin_cos();
        let move_ = |p: &Pose| Pose::new(shift.x + c * p.x - s * p.y, shift.y + s * p.x + c * p.y, p.theta() + shift.theta());
        let d = rs_distance(&a, &b, 1.0);
        prop_assert!((d - rs_distance(&move_(&a), &move_(&b), 1.0)).abs() <= 1e-9 * d.max(1.0));
    }

    #[test]
    fn scaling_radius_scales_distance(a in pose(), b in pose(), k in 0.2..5.0f64) {
        let d = rs_distance(&a, &b, 1.0);
        let scaled = rs_distance(&a.scaled(k), &b.scaled(k), k);
        prop_assert!((scaled - k * d).abs() <= 1e-9 * (k * d).max(1.0));
    }

    #[test]
    fn steered_path_reaches_target(a in pose(), b in pose()) {
        let p = steer(&a, &b, 1.0);
        let e = p.end_pose(&a);
        prop_assert!(e.planar_distance(&b) <= 1e-9);
        prop_assert!(wrap_angle(e.theta() - b.theta()).abs() <= 1e-9);
        prop_assert_eq!(p.total_length, rs_distance(&a, &b, 1.0));
    }
}

#[test]
fn ball_box_right_side_and_local_bound() {
    let c = rs_constants(1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut pairs, mut left) = (0, 0);
    while pairs < 5000 {
        let a = Pose::new(
            rng.random_range(0.0..10.0),
            rng.random_range(0.0..10.0),
            rng.random_range(-PI..PI),
        );
        let b = Pose::new(
            a.x + rng.random_range(-0.5..0.5),
            a.y + rng.random_range(-0.5..0.5),
            a.theta() + rng.random_range(-0.5..0.5),
        );
        let d = rs_distance(&a, &b, 1.0);
        if d >= c.sigma_min {
            continue;
        }
        pairs += 1;
        let z = pseudonorm(&privileged_coords(&a, &b));
        assert!(d <= c.a_max * z + 1e-12, "right side fails: d={d} |z|={z}");
        // with a unit left constant the sandwich does hold
        assert!(z <= d + 1e-12, "d={d} |z|={z}");
        left += usize::from(c.a_min * z > d);
        let dt = wrap_angle(b.theta() - a.theta());
        let euclid = ((b.x - a.x).powi(2) + (b.y - a.y).powi(2) + dt * dt).sqrt();
        assert!(d <= 2.0 * c.a_max * euclid.sqrt() + 1e-12);
    }
    eprintln!(
        "left side with a_min = {:.4} violated on {left} of {pairs} pairs",
        c.a_min
    );
}
