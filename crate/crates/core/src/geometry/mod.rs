//! Rigid transforms, sweep accumulation, distances, angular differences and
//! IOU kernels.

mod iou;
mod sweep;
mod transform;

use std::f64::consts::TAU;

pub use iou::{bev_intersection_area, bev_iou, iou_3d, scale_iou, AREA_EPSILON};
pub use sweep::{accumulate_sweeps, DecoratedCloud, Sweep, DEFAULT_ACCUMULATION_WINDOW};
pub use transform::{
    quaternion_from_yaw, yaw_from_quaternion, RigidTransform, QUATERNION_NORM_TOLERANCE,
};

use crate::model::BoxRecord;

/// Ground-plane distance between box centers; z is ignored.
pub fn center_distance_2d(a: &BoxRecord, b: &BoxRecord) -> f64 {
    (a.translation[0] - b.translation[0]).hypot(a.translation[1] - b.translation[1])
}

/// Smallest angle between two headings on the given period (2pi, or pi for
/// classes without a distinguishable front). Result lies in [0, period / 2].
pub fn yaw_diff(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).rem_euclid(period);
    d.min(period - d).max(0.0)
}

pub const FULL_TURN: f64 = TAU;
pub const HALF_TURN: f64 = std::f64::consts::PI;

/// L2 norm of the planar velocity difference; `None` if either is missing.
pub fn velocity_error(a: &BoxRecord, b: &BoxRecord) -> Option<f64> {
    let (va, vb) = (a.velocity?, b.velocity?);
    Some((va[0] - vb[0]).hypot(va[1] - vb[1]))
}
