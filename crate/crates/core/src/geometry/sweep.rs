use super::transform::RigidTransform;
use crate::error::{Error, Result};

/// Default look-back budget for temporal accumulation, seconds.
pub const DEFAULT_ACCUMULATION_WINDOW: f64 = 0.5;

/// One lidar sweep in its sensor frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    /// (x, y, z, intensity).
    pub points: Vec<[f64; 4]>,
    /// Microseconds.
    pub timestamp: i64,
    pub sensor_to_global: RigidTransform,
}

/// Points in the keyframe frame, each decorated with its age in seconds:
/// (x, y, z, intensity, time_delta).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DecoratedCloud {
    pub points: Vec<[f64; 5]>,
}

impl DecoratedCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Moves every sweep no older than `window` seconds into the keyframe frame.
///
/// Sweeps are emitted newest first (stable for equal timestamps); point order
/// inside a sweep is kept. A sweep exactly `window` old is included.
pub fn accumulate_sweeps(
    sweeps: &[Sweep],
    keyframe_pose: &RigidTransform,
    keyframe_time: i64,
    window: f64,
) -> Result<DecoratedCloud> {
    if let Some(late) = sweeps.iter().find(|s| s.timestamp > keyframe_time) {
        return Err(Error::TemporalOrder {
            sweep_time: late.timestamp,
            keyframe_time,
        });
    }
    let mut order: Vec<&Sweep> = sweeps
        .iter()
        .filter(|s| (keyframe_time - s.timestamp) as f64 / 1e6 <= window)
        .collect();
    order.sort_by_key(|s| std::cmp::Reverse(s.timestamp));

    let to_keyframe = keyframe_pose.inverse();
    let mut points = Vec::with_capacity(order.iter().map(|s| s.points.len()).sum());
    for sweep in order {
        let delta = (keyframe_time - sweep.timestamp) as f64 / 1e6;
        let t = to_keyframe.compose(&sweep.sensor_to_global);
        points.extend(sweep.points.iter().map(|&[x, y, z, i]| {
            let [px, py, pz] = t.apply([x, y, z]);
            [px, py, pz, i, delta]
        }));
    }
    Ok(DecoratedCloud { points })
}
