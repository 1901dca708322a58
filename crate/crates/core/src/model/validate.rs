//! Structural checks applied to scenes, ground truth and submissions before
//! evaluation.

use std::collections::{BTreeMap, HashSet};

use super::types::{
    normalize_yaw, BoxRecord, DetectionBox, EvalSet, GroundTruthBox, Scene, TrackBox,
    KEYFRAME_JITTER,
};
use crate::error::{Error, Result, ValidationError, Violation, ViolationKind};

pub fn validate_scenes(scenes: &[Scene]) -> Result<()> {
    let mut seen = HashSet::new();
    for (i, scene) in scenes.iter().enumerate() {
        if !(scene.keyframe_rate.is_finite() && scene.keyframe_rate > 0.0) {
            return Err(Error::schema(
                format!("scenes[{i}].keyframe_rate"),
                "keyframe rate must be positive",
            ));
        }
        let nominal = 1e6 / scene.keyframe_rate;
        for (j, pair) in scene.samples.windows(2).enumerate() {
            let dt = (pair[1].timestamp - pair[0].timestamp) as f64;
            let path = format!("scenes[{i}].samples[{}].timestamp", j + 1);
            if dt <= 0.0 {
                return Err(Error::schema(path, "timestamps must be strictly increasing"));
            }
            if (dt - nominal).abs() > KEYFRAME_JITTER * nominal {
                return Err(Error::schema(
                    path,
                    format!(
                        "keyframe spacing {} us deviates more than {}% from {} us",
                        dt,
                        KEYFRAME_JITTER * 100.0,
                        nominal
                    ),
                ));
            }
        }
        for (j, s) in scene.samples.iter().enumerate() {
            if !seen.insert(s.sample_id.as_str()) {
                return Err(Error::schema(
                    format!("scenes[{i}].samples[{j}].sample_token"),
                    format!("sample `{}` appears twice", s.sample_id),
                ));
            }
        }
    }
    Ok(())
}

fn known_samples(scenes: &[Scene]) -> HashSet<&str> {
    scenes
        .iter()
        .flat_map(|s| s.samples.iter().map(|x| x.sample_id.as_str()))
        .collect()
}

fn check_record(
    record: &mut BoxRecord,
    index: usize,
    known: &HashSet<&str>,
    out: &mut Vec<Violation>,
) {
    let mut push = |kind| {
        out.push(Violation {
            index,
            sample_id: record.sample_id.clone(),
            kind,
        })
    };
    if !known.contains(record.sample_id.as_str()) {
        push(ViolationKind::UnknownSample);
    }
    if record.translation.iter().any(|v| !v.is_finite()) {
        push(ViolationKind::NonFinite("translation"));
    }
    if record.size.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        push(ViolationKind::NonPositiveSize(record.size));
    }
    if !record.yaw.is_finite() {
        push(ViolationKind::NonFinite("yaw"));
    }
    if record
        .velocity
        .is_some_and(|v| v.iter().any(|c| !c.is_finite()))
    {
        push(ViolationKind::NonFinite("velocity"));
    }
    record.yaw = normalize_yaw(record.yaw);
}

fn check_score(score: f64, record: &BoxRecord, index: usize, out: &mut Vec<Violation>) {
    if !(score.is_finite() && (0.0..=1.0).contains(&score)) {
        out.push(Violation {
            index,
            sample_id: record.sample_id.clone(),
            kind: ViolationKind::ScoreOutOfRange(score),
        });
    }
}

fn group<T>(boxes: Vec<T>, sample_of: impl Fn(&T) -> &str) -> EvalSet<T> {
    let mut grouped: BTreeMap<String, Vec<T>> = BTreeMap::new();
    for b in boxes {
        grouped.entry(sample_of(&b).to_string()).or_default().push(b);
    }
    grouped
}

fn finish<T>(
    boxes: Vec<T>,
    violations: Vec<Violation>,
    sample_of: impl Fn(&T) -> &str,
) -> Result<EvalSet<T>, ValidationError> {
    if violations.is_empty() {
        Ok(group(boxes, sample_of))
    } else {
        Err(ValidationError { violations })
    }
}

pub fn validate_detections(
    mut boxes: Vec<DetectionBox>,
    scenes: &[Scene],
) -> Result<EvalSet<DetectionBox>, ValidationError> {
    let known = known_samples(scenes);
    let mut violations = Vec::new();
    for (i, b) in boxes.iter_mut().enumerate() {
        check_record(&mut b.base, i, &known, &mut violations);
        check_score(b.score, &b.base, i, &mut violations);
    }
    finish(boxes, violations, |b| &b.base.sample_id)
}

pub fn validate_tracks(
    mut boxes: Vec<TrackBox>,
    scenes: &[Scene],
) -> Result<EvalSet<TrackBox>, ValidationError> {
    let known = known_samples(scenes);
    let mut violations = Vec::new();
    let mut ids = HashSet::new();
    for (i, b) in boxes.iter_mut().enumerate() {
        check_record(&mut b.base, i, &known, &mut violations);
        check_score(b.score, &b.base, i, &mut violations);
        if !b.base.category.is_tracking() {
            violations.push(Violation {
                index: i,
                sample_id: b.base.sample_id.clone(),
                kind: ViolationKind::WrongTask(b.base.category.to_string()),
            });
        }
        if !ids.insert((b.base.sample_id.clone(), b.tracking_id.clone())) {
            violations.push(Violation {
                index: i,
                sample_id: b.base.sample_id.clone(),
                kind: ViolationKind::DuplicateTrackingId(b.tracking_id.clone()),
            });
        }
    }
    finish(boxes, violations, |b| &b.base.sample_id)
}

pub fn validate_ground_truth(
    mut boxes: Vec<GroundTruthBox>,
    scenes: &[Scene],
) -> Result<EvalSet<GroundTruthBox>, ValidationError> {
    let known = known_samples(scenes);
    let mut violations = Vec::new();
    let mut ids = HashSet::new();
    for (i, b) in boxes.iter_mut().enumerate() {
        check_record(&mut b.base, i, &known, &mut violations);
        if !ids.insert((b.base.sample_id.clone(), b.instance_id.clone())) {
            violations.push(Violation {
                index: i,
                sample_id: b.base.sample_id.clone(),
                kind: ViolationKind::DuplicateInstanceId(b.instance_id.clone()),
            });
        }
    }
    finish(boxes, violations, |b| &b.base.sample_id)
}
