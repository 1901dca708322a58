//! Deterministic synthetic scenes and noisy submissions built from them.
//!
//! Every random draw comes from a [`Stream`] keyed by the user seed plus the
//! scene, object (or sample / instance token) and a [`Channel`], so turning
//! one noise source on or off never changes the draws of another.

mod perturb;
pub mod rng;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use perturb::{perturb_detections, perturb_tracks, NoiseModel, ScoreModel};
pub use rng::{fnv1a, Channel, Stream};

use crate::error::{Error, Result};
use crate::geometry::{RigidTransform, Sweep};
use crate::model::{BoxRecord, DetectionClass, EvalSet, GroundTruthBox, SampleInfo, Scene};

/// Typical (width, length, height) per class, meters.
pub fn default_size(class: DetectionClass) -> [f64; 3] {
    use DetectionClass as D;
    match class {
        D::Car => [1.95, 4.6, 1.7],
        D::Truck => [2.5, 6.9, 2.8],
        D::Bus => [2.9, 11.0, 3.5],
        D::Trailer => [2.9, 12.3, 3.9],
        D::ConstructionVehicle => [2.8, 6.4, 3.2],
        D::Pedestrian => [0.67, 0.73, 1.77],
        D::Motorcycle => [0.77, 2.1, 1.47],
        D::Bicycle => [0.6, 1.7, 1.3],
        D::TrafficCone => [0.41, 0.41, 1.07],
        D::Barrier => [2.5, 0.5, 0.98],
    }
}

/// Attribute vocabulary per class; empty for classes without attributes.
pub fn attributes(class: DetectionClass) -> &'static [&'static str] {
    use DetectionClass as D;
    match class {
        D::Car | D::Truck | D::Bus | D::Trailer | D::ConstructionVehicle => {
            &["vehicle.moving", "vehicle.parked", "vehicle.stopped"]
        }
        D::Pedestrian => &[
            "pedestrian.moving",
            "pedestrian.standing",
            "pedestrian.sitting_lying_down",
        ],
        D::Motorcycle | D::Bicycle => &["cycle.with_rider", "cycle.without_rider"],
        D::TrafficCone | D::Barrier => &[],
    }
}

/// Classes that never move.
pub fn is_static(class: DetectionClass) -> bool {
    matches!(class, DetectionClass::TrafficCone | DetectionClass::Barrier)
}

fn attribute_for(class: DetectionClass, speed: f64) -> Option<String> {
    let list = attributes(class);
    let i = match class {
        DetectionClass::Motorcycle | DetectionClass::Bicycle => 0,
        _ if speed > 0.5 => 0,
        _ => 1,
    };
    list.get(i).map(|s| s.to_string())
}

/// Lidar pose relative to the ego frame.
const SENSOR_MOUNT: ([f64; 3], f64) = ([0.94, 0.0, 1.84], 0.01);

/// Spacing of the synthetic lidar sweeps, microseconds (20 Hz).
pub const SWEEP_INTERVAL_US: i64 = 50_000;

const SCENE_TIME_BASE_US: i64 = 1_000_000_000;
const SCENE_TIME_STRIDE_US: i64 = 1_000_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub n_scenes: usize,
    pub n_frames_per_scene: usize,
    /// Hz.
    pub keyframe_rate: f64,
    /// Objects per scene.
    pub n_objects: usize,
    /// Relative class frequencies; must sum to 1.
    pub category_mix: BTreeMap<DetectionClass, f64>,
    /// Speed bounds of moving objects, m/s.
    pub speed_range: [f64; 2],
    /// Objects start uniformly in [-extent, extent]^2 around the origin, meters.
    pub world_extent: f64,
    /// Ego speed along +x, m/s.
    pub ego_speed: f64,
    /// Lidar sweeps stored per keyframe, newest at the keyframe time.
    pub sweeps_per_keyframe: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        let w = 1.0 / DetectionClass::ALL.len() as f64;
        SynthConfig {
            n_scenes: 10,
            n_frames_per_scene: 20,
            keyframe_rate: 2.0,
            n_objects: 20,
            category_mix: DetectionClass::ALL.into_iter().map(|c| (c, w)).collect(),
            speed_range: [0.0, 3.0],
            world_extent: 30.0,
            ego_speed: 0.0,
            sweeps_per_keyframe: 12,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.into()));
        if self.n_scenes == 0 || self.n_frames_per_scene == 0 || self.n_objects == 0 {
            return bad("scene, frame and object counts must be positive");
        }
        if !(self.keyframe_rate.is_finite() && self.keyframe_rate > 0.0) {
            return bad("keyframe_rate must be positive");
        }
        if self.category_mix.values().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return bad("category weights must be non-negative");
        }
        let total: f64 = self.category_mix.values().sum();
        if (total - 1.0).abs() > 1e-9 {
            return bad("category weights must sum to 1");
        }
        let [lo, hi] = self.speed_range;
        if !(lo >= 0.0 && hi >= lo && hi.is_finite()) {
            return bad("speed_range must satisfy 0 <= min <= max");
        }
        if !(self.world_extent.is_finite() && self.world_extent > 0.0) {
            return bad("world_extent must be positive");
        }
        if !self.ego_speed.is_finite() {
            return bad("ego_speed must be finite");
        }
        Ok(())
    }
}

/// Generated ground truth. Tracks are the boxes sharing an instance id.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthScenario {
    pub scenes: Vec<Scene>,
    pub gt: EvalSet<GroundTruthBox>,
    /// Lidar sweeps per keyframe sample, newest first.
    pub sweeps: BTreeMap<String, Vec<Sweep>>,
}

impl SynthScenario {
    /// Ground-truth boxes grouped by instance id, in frame order.
    pub fn tracks(&self) -> BTreeMap<&str, Vec<&GroundTruthBox>> {
        let mut tracks: BTreeMap<&str, Vec<&GroundTruthBox>> = BTreeMap::new();
        for scene in &self.scenes {
            for s in &scene.samples {
                for b in self.gt.get(&s.sample_id).into_iter().flatten() {
                    tracks.entry(b.instance_id.as_str()).or_default().push(b);
                }
            }
        }
        tracks
    }
}

pub fn sample_id(scene: usize, frame: usize) -> String {
    format!("scene-{scene:04}-kf{frame:03}")
}

struct Agent {
    instance_id: String,
    class: DetectionClass,
    start: [f64; 2],
    yaw: f64,
    speed: f64,
}

impl Agent {
    fn velocity(&self) -> [f64; 2] {
        [self.speed * self.yaw.cos(), self.speed * self.yaw.sin()]
    }

    fn position(&self, t: f64) -> [f64; 3] {
        let [vx, vy] = self.velocity();
        let h = default_size(self.class)[2];
        [self.start[0] + vx * t, self.start[1] + vy * t, h / 2.0]
    }
}

fn ego_pose(config: &SynthConfig, t: f64) -> RigidTransform {
    RigidTransform::from_yaw(0.0, [config.ego_speed * t, 0.0, 0.0])
}

fn sensor_pose(config: &SynthConfig, t: f64) -> RigidTransform {
    let (offset, yaw) = SENSOR_MOUNT;
    ego_pose(config, t).compose(&RigidTransform::from_yaw(yaw, offset))
}

fn generate_scene(config: &SynthConfig, scene: usize) -> (Scene, EvalSet<GroundTruthBox>, BTreeMap<String, Vec<Sweep>>) {
    let classes: Vec<DetectionClass> = config.category_mix.keys().copied().collect();
    let weights: Vec<f64> = config.category_mix.values().copied().collect();
    let scene_id = format!("scene-{scene:04}");
    let agents: Vec<Agent> = (0..config.n_objects)
        .map(|k| {
            let mut rng = Stream::new(config.seed, scene as u64, k as u64, Channel::Layout);
            let class = classes[rng.weighted(&weights)];
            let start = [
                rng.range(-config.world_extent, config.world_extent),
                rng.range(-config.world_extent, config.world_extent),
            ];
            let yaw = rng.range(-PI, PI);
            let speed = rng.range(config.speed_range[0], config.speed_range[1]);
            Agent {
                instance_id: format!("{scene_id}-obj{k:03}"),
                class,
                start,
                yaw,
                speed: if is_static(class) { 0.0 } else { speed },
            }
        })
        .collect();

    let t0 = SCENE_TIME_BASE_US + scene as i64 * SCENE_TIME_STRIDE_US;
    let period_us = 1e6 / config.keyframe_rate;
    let mut samples = Vec::with_capacity(config.n_frames_per_scene);
    let mut gt = EvalSet::new();
    let mut sweeps = BTreeMap::new();
    for f in 0..config.n_frames_per_scene {
        let timestamp = t0 + (f as f64 * period_us).round() as i64;
        let t = (timestamp - t0) as f64 * 1e-6;
        let id = sample_id(scene, f);
        samples.push(SampleInfo {
            sample_id: id.clone(),
            timestamp,
            ego_translation: ego_pose(config, t).translation(),
        });
        let boxes = agents
            .iter()
            .map(|a| {
                let base = BoxRecord::new(&id, a.class, a.position(t), default_size(a.class), a.yaw)
                    .with_velocity(a.velocity());
                let base = match attribute_for(a.class, a.speed) {
                    Some(attr) => base.with_attribute(attr),
                    None => base,
                };
                let mut b = GroundTruthBox::new(base, &a.instance_id);
                b.num_sensor_points = Some(1);
                b
            })
            .collect();
        gt.insert(id.clone(), boxes);

        let frame_sweeps = (0..config.sweeps_per_keyframe)
            .map(|j| {
                let ts = timestamp - j as i64 * SWEEP_INTERVAL_US;
                let ts_rel = (ts - t0) as f64 * 1e-6;
                let pose = sensor_pose(config, ts_rel);
                let to_sensor = pose.inverse();
                let points = agents
                    .iter()
                    .enumerate()
                    .map(|(k, a)| {
                        let [x, y, z] = to_sensor.apply(a.position(ts_rel));
                        [x, y, z, k as f64]
                    })
                    .collect();
                Sweep {
                    points,
                    timestamp: ts,
                    sensor_to_global: pose,
                }
            })
            .collect();
        sweeps.insert(id, frame_sweeps);
    }
    let scene = Scene {
        scene_id,
        samples,
        keyframe_rate: config.keyframe_rate,
    };
    (scene, gt, sweeps)
}

/// Constant-velocity agents observed at every keyframe. One sweep point per
/// object per sweep, at the object's center, with the object index as
/// intensity.
pub fn generate_scenes(config: &SynthConfig) -> Result<SynthScenario> {
    config.validate()?;
    let parts: Vec<_> = (0..config.n_scenes)
        .into_par_iter()
        .map(|s| generate_scene(config, s))
        .collect();
    let mut out = SynthScenario {
        scenes: Vec::with_capacity(parts.len()),
        gt: EvalSet::new(),
        sweeps: BTreeMap::new(),
    };
    for (scene, gt, sweeps) in parts {
        out.scenes.push(scene);
        out.gt.extend(gt);
        out.sweeps.extend(sweeps);
    }
    Ok(out)
}
