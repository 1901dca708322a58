use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use super::taxonomy::DetectionClass;

/// Boxes grouped by sample token. Ordered so every pass over a set visits
/// samples in the same sequence.
pub type EvalSet<T> = BTreeMap<String, Vec<T>>;

/// Wraps an angle into (-pi, pi].
pub fn normalize_yaw(yaw: f64) -> f64 {
    let r = yaw.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// A yaw-only 3D cuboid in the global frame.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxRecord {
    pub sample_id: String,
    pub translation: [f64; 3],
    /// (width, length, height) in meters.
    pub size: [f64; 3],
    pub yaw: f64,
    pub velocity: Option<[f64; 2]>,
    pub category: DetectionClass,
    pub attribute: Option<String>,
}

impl BoxRecord {
    pub fn new(
        sample_id: impl Into<String>,
        category: DetectionClass,
        translation: [f64; 3],
        size: [f64; 3],
        yaw: f64,
    ) -> Self {
        BoxRecord {
            sample_id: sample_id.into(),
            translation,
            size,
            yaw: normalize_yaw(yaw),
            velocity: None,
            category,
            attribute: None,
        }
    }

    pub fn with_velocity(mut self, velocity: [f64; 2]) -> Self {
        self.velocity = Some(velocity);
        self
    }

    pub fn with_attribute(mut self, attribute: impl Into<String>) -> Self {
        self.attribute = Some(attribute.into());
        self
    }

    pub fn volume(&self) -> f64 {
        self.size.iter().product()
    }

    /// Ground-plane corners in counter-clockwise order. Width spans the box's
    /// local y axis, length its local x axis (the heading).
    pub fn footprint(&self) -> [[f64; 2]; 4] {
        let (s, c) = self.yaw.sin_cos();
        let hl = self.size[1] / 2.0;
        let hw = self.size[0] / 2.0;
        let [x, y, _] = self.translation;
        [(hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)]
            .map(|(dx, dy)| [x + c * dx - s * dy, y + s * dx + c * dy])
    }

    /// True when (x, y) lies inside the rotated ground-plane rectangle.
    pub fn footprint_contains(&self, x: f64, y: f64) -> bool {
        let (s, c) = self.yaw.sin_cos();
        let dx = x - self.translation[0];
        let dy = y - self.translation[1];
        let along = c * dx + s * dy;
        let across = -s * dx + c * dy;
        along.abs() <= self.size[1] / 2.0 && across.abs() <= self.size[0] / 2.0
    }
}

/// Anything evaluated as a box: ground truth, detections and tracks.
pub trait AsBox {
    fn record(&self) -> &BoxRecord;
}

impl AsBox for BoxRecord {
    fn record(&self) -> &BoxRecord {
        self
    }
}

impl<T: AsBox> AsBox for &T {
    fn record(&self) -> &BoxRecord {
        (*self).record()
    }
}

/// Boxes carrying a confidence score.
pub trait Scored: AsBox {
    fn score(&self) -> f64;
}

impl<T: Scored> Scored for &T {
    fn score(&self) -> f64 {
        (*self).score()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthBox {
    pub base: BoxRecord,
    /// Stable across the samples of one scene.
    pub instance_id: String,
    pub num_sensor_points: Option<u32>,
    /// Bike-rack style zone: predictions inside are discarded, the box itself
    /// is never scored.
    pub is_ignore_region: bool,
}

impl GroundTruthBox {
    pub fn new(base: BoxRecord, instance_id: impl Into<String>) -> Self {
        GroundTruthBox {
            base,
            instance_id: instance_id.into(),
            num_sensor_points: None,
            is_ignore_region: false,
        }
    }
}

impl AsBox for GroundTruthBox {
    fn record(&self) -> &BoxRecord {
        &self.base
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionBox {
    pub base: BoxRecord,
    pub score: f64,
}

impl AsBox for DetectionBox {
    fn record(&self) -> &BoxRecord {
        &self.base
    }
}

impl Scored for DetectionBox {
    fn score(&self) -> f64 {
        self.score
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackBox {
    pub base: BoxRecord,
    pub score: f64,
    pub tracking_id: String,
}

impl AsBox for TrackBox {
    fn record(&self) -> &BoxRecord {
        &self.base
    }
}

impl Scored for TrackBox {
    fn score(&self) -> f64 {
        self.score
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleInfo {
    pub sample_id: String,
    /// Microseconds.
    pub timestamp: i64,
    /// Ego position in the global frame, used for range filtering.
    pub ego_translation: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub scene_id: String,
    pub samples: Vec<SampleInfo>,
    /// Keyframe rate in Hz.
    pub keyframe_rate: f64,
}

pub const DEFAULT_KEYFRAME_RATE: f64 = 2.0;

/// Allowed relative deviation of keyframe spacing from 1 / keyframe_rate.
pub const KEYFRAME_JITTER: f64 = 0.25;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn yaw_normalization_range() {
        assert_eq!(normalize_yaw(PI), PI);
        assert!((normalize_yaw(-PI) - PI).abs() < 1e-15);
        assert!((normalize_yaw(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert!((normalize_yaw(0.1 + 4.0 * TAU) - 0.1).abs() < 1e-12);
        for i in -100..100 {
            let y = normalize_yaw(i as f64 * 0.37);
            assert!(y > -PI && y <= PI);
        }
    }

    #[test]
    fn footprint_contains_rotated() {
        let b = BoxRecord::new("s", DetectionClass::Car, [10.0, 0.0, 0.0], [2.0, 4.0, 1.5], PI / 2.0);
        // length now points along +y
        assert!(b.footprint_contains(10.0, 1.9));
        assert!(!b.footprint_contains(11.5, 0.0));
        let corners = b.footprint();
        for [x, y] in corners {
            assert!(b.footprint_contains(10.0 + (x - 10.0) * (1.0 - 1e-9), y * (1.0 - 1e-9)));
        }
    }
}
