use std::collections::HashMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rng::{fnv1a, Channel, Stream};
use super::{attribute_for, attributes, default_size};
use crate::error::{Error, Result};
use crate::model::{BoxRecord, DetectionBox, DetectionClass, EvalSet, GroundTruthBox, Scene, TrackBox};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreModel {
    /// 0.5 + 0.5 exp(-d), d the summed realized noise; clutter U[0, 0.5).
    #[default]
    InverseNoise,
    /// U[0, 1) for every box.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseModel {
    /// Per-axis ground-plane center noise, meters.
    pub sigma_translation: f64,
    /// Relative size noise per dimension.
    pub sigma_scale: f64,
    pub sigma_yaw: f64,
    /// Per-axis velocity noise, m/s.
    pub sigma_velocity: f64,
    pub drop_prob: f64,
    /// Expected clutter boxes per sample.
    pub clutter_rate: f64,
    pub attribute_flip_prob: f64,
    /// Per track and frame.
    pub id_switch_prob: f64,
    pub score_model: ScoreModel,
    /// Clutter is placed uniformly in [-extent, extent]^2, meters.
    pub clutter_extent: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            sigma_translation: 0.0,
            sigma_scale: 0.0,
            sigma_yaw: 0.0,
            sigma_velocity: 0.0,
            drop_prob: 0.0,
            clutter_rate: 0.0,
            attribute_flip_prob: 0.0,
            id_switch_prob: 0.0,
            score_model: ScoreModel::InverseNoise,
            clutter_extent: 30.0,
        }
    }
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        let sigmas = [
            ("sigma_translation", self.sigma_translation),
            ("sigma_scale", self.sigma_scale),
            ("sigma_yaw", self.sigma_yaw),
            ("sigma_velocity", self.sigma_velocity),
            ("clutter_rate", self.clutter_rate),
            ("clutter_extent", self.clutter_extent),
        ];
        for (name, v) in sigmas {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("{name} must be non-negative, got {v}")));
            }
        }
        let probs = [
            ("drop_prob", self.drop_prob),
            ("attribute_flip_prob", self.attribute_flip_prob),
            ("id_switch_prob", self.id_switch_prob),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        Ok(())
    }
}

/// Noisy copy of one ground-truth box and its score; `None` if dropped.
fn perturb_box(gt: &GroundTruthBox, noise: &NoiseModel, seed: u64) -> Option<(BoxRecord, f64)> {
    let a = fnv1a(&gt.base.sample_id);
    let b = fnv1a(&gt.instance_id);
    let stream = |ch| Stream::new(seed, a, b, ch);
    if stream(Channel::Drop).bernoulli(noise.drop_prob) {
        return None;
    }
    let mut out = gt.base.clone();
    let mut deviation = 0.0;

    let mut s = stream(Channel::Translation);
    let (dx, dy) = (noise.sigma_translation * s.normal(), noise.sigma_translation * s.normal());
    out.translation[0] += dx;
    out.translation[1] += dy;
    deviation += dx.hypot(dy);

    let mut s = stream(Channel::Scale);
    for d in &mut out.size {
        let f = (1.0 + noise.sigma_scale * s.normal()).max(0.05);
        *d *= f;
        deviation += (f - 1.0).abs();
    }

    let dyaw = noise.sigma_yaw * stream(Channel::Yaw).normal();
    out.yaw = crate::model::normalize_yaw(out.yaw + dyaw);
    deviation += dyaw.abs();

    if let Some(v) = &mut out.velocity {
        let mut s = stream(Channel::Velocity);
        let (dvx, dvy) = (noise.sigma_velocity * s.normal(), noise.sigma_velocity * s.normal());
        v[0] += dvx;
        v[1] += dvy;
        deviation += dvx.hypot(dvy);
    }

    if stream(Channel::Attribute).bernoulli(noise.attribute_flip_prob) {
        let list = attributes(out.category);
        if let Some(i) = out
            .attribute
            .as_deref()
            .and_then(|attr| list.iter().position(|x| *x == attr))
        {
            out.attribute = Some(list[(i + 1) % list.len()].to_string());
        }
    }

    let score = match noise.score_model {
        ScoreModel::InverseNoise => 0.5 + 0.5 * (-deviation).exp(),
        ScoreModel::Uniform => stream(Channel::Score).uniform(),
    };
    Some((out, score))
}

/// False positives for one sample: floor(rate) boxes plus one more with
/// probability frac(rate).
fn clutter(
    sample_id: &str,
    classes: &[DetectionClass],
    noise: &NoiseModel,
    seed: u64,
) -> Vec<(BoxRecord, f64)> {
    if noise.clutter_rate <= 0.0 || classes.is_empty() {
        return Vec::new();
    }
    let mut s = Stream::new(seed, fnv1a(sample_id), 0, Channel::Clutter);
    let extra = s.bernoulli(noise.clutter_rate.fract());
    let n = noise.clutter_rate.floor() as usize + extra as usize;
    let e = noise.clutter_extent;
    (0..n)
        .map(|_| {
            let class = classes[s.index(classes.len())];
            let size = default_size(class);
            let at = [s.range(-e, e), s.range(-e, e), size[2] / 2.0];
            let yaw = s.range(-PI, PI);
            let score = match noise.score_model {
                ScoreModel::InverseNoise => s.range(0.0, 0.5),
                ScoreModel::Uniform => s.uniform(),
            };
            let base = BoxRecord::new(sample_id, class, at, size, yaw).with_velocity([0.0, 0.0]);
            let base = match attribute_for(class, 0.0) {
                Some(attr) => base.with_attribute(attr),
                None => base,
            };
            (base, score)
        })
        .collect()
}

/// Detection submission derived from ground truth. Ignore regions are not
/// echoed. Clutter is drawn from every detection class.
pub fn perturb_detections(
    gt: &EvalSet<GroundTruthBox>,
    noise: &NoiseModel,
    seed: u64,
) -> Result<EvalSet<DetectionBox>> {
    noise.validate()?;
    let out = gt
        .par_iter()
        .map(|(sample, boxes)| {
            let dets = boxes
                .iter()
                .filter(|g| !g.is_ignore_region)
                .filter_map(|g| perturb_box(g, noise, seed))
                .chain(clutter(sample, &DetectionClass::ALL, noise, seed))
                .map(|(base, score)| DetectionBox { base, score })
                .collect();
            (sample.clone(), dets)
        })
        .collect();
    Ok(out)
}

/// Tracking submission derived from ground truth, walking each scene in
/// frame order. A track starts with its instance id as tracking id; every
/// identity switch moves it to a fresh id for the rest of the scene.
/// Non-tracking classes are skipped; each clutter box is its own track.
pub fn perturb_tracks(
    scenes: &[Scene],
    gt: &EvalSet<GroundTruthBox>,
    noise: &NoiseModel,
    seed: u64,
) -> Result<EvalSet<TrackBox>> {
    noise.validate()?;
    let parts: Vec<Vec<(String, Vec<TrackBox>)>> = scenes
        .par_iter()
        .map(|scene| {
            let mut switches: HashMap<&str, usize> = HashMap::new();
            let mut out = Vec::with_capacity(scene.samples.len());
            for (f, sample) in scene.samples.iter().enumerate() {
                let boxes = gt.get(&sample.sample_id).map(Vec::as_slice).unwrap_or_default();
                let mut tracks = Vec::new();
                for g in boxes {
                    if g.is_ignore_region || !g.base.category.is_tracking() {
                        continue;
                    }
                    let id = g.instance_id.as_str();
                    let n = match switches.get_mut(id) {
                        None => {
                            switches.insert(id, 0);
                            0
                        }
                        Some(n) => {
                            let mut s = Stream::new(seed, fnv1a(id), f as u64, Channel::IdSwitch);
                            if s.bernoulli(noise.id_switch_prob) {
                                *n += 1;
                            }
                            *n
                        }
                    };
                    if let Some((mut base, score)) = perturb_box(g, noise, seed) {
                        base.attribute = None;
                        let tracking_id = if n == 0 { id.to_string() } else { format!("{id}~{n}") };
                        tracks.push(TrackBox {
                            base,
                            score,
                            tracking_id,
                        });
                    }
                }
                let clutter = clutter(&sample.sample_id, &DetectionClass::TRACKING, noise, seed);
                for (i, (mut base, score)) in clutter.into_iter().enumerate() {
                    base.attribute = None;
                    tracks.push(TrackBox {
                        base,
                        score,
                        tracking_id: format!("clutter-{}-{i}", sample.sample_id),
                    });
                }
                out.push((sample.sample_id.clone(), tracks));
            }
            out
        })
        .collect();
    Ok(parts.into_iter().flatten().collect())
}
