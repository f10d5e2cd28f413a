//! Asymptotically optimal sampling-based motion planning for driftless
//! control-affine systems, instantiated on the Reeds-Shepp car.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod environment;
pub mod error;
pub mod exhaustivity;
pub mod geometry;
pub mod planners;
pub mod pose;
pub mod reeds_shepp;
pub mod subriemannian;

pub use environment::{in_goal, GoalRegion, Scenario};
pub use error::{Error, Result};
pub use planners::{dfmt_plan, dprm_plan, NearMode, PlanConfig, PlanResult, PlannerGraph, PlannerKind};
pub use pose::{wrap_angle, Pose};
pub use reeds_shepp::{rs_distance, steer, Gear, RsPath, RsSegment, SegmentKind};
