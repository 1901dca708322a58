use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_path_to_error::Segment;

use crate::error::{Error, Result};
use crate::geometry::{quaternion_from_yaw, yaw_from_quaternion, RigidTransform, Sweep};
use crate::model::{
    map_category, validate_detections, validate_ground_truth, validate_scenes, validate_tracks,
    BoxRecord, DetectionBox, DetectionClass, EvalSet, GroundTruthBox, SampleInfo, Scene, TrackBox,
    DEFAULT_KEYFRAME_RATE, IGNORE_REGION_CLASS,
};

/// Object fields whose keys are sample tokens rather than field names.
const TOKEN_MAPS: [&str; 3] = ["results", "annotations", "sweeps"];

fn render_path(path: &serde_path_to_error::Path) -> String {
    let mut out = String::new();
    let mut keyed = false;
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("[{index}]")),
            Segment::Map { key } if keyed => out.push_str(&format!("[{key:?}]")),
            Segment::Map { key } | Segment::Enum { variant: key } => {
                if !out.is_empty() {
                    out.push('.');
                }
                out.push_str(key);
            }
            Segment::Unknown => out.push_str(".?"),
        }
        keyed = matches!(seg, Segment::Map { key } if TOKEN_MAPS.contains(&key.as_str()) && !keyed);
    }
    if out.is_empty() {
        out.push('$');
    }
    out
}

/// Parses a JSON document, reporting failures with the path of the
/// offending value.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = render_path(e.path());
        Error::schema(path, e.into_inner().to_string())
    })?;
    de.end().map_err(|e| Error::schema("$", e.to_string()))?;
    Ok(value)
}

/// Pretty JSON with a trailing newline. Floats use the shortest decimal
/// that round-trips.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("in-memory types always serialize");
    s.push('\n');
    s
}

fn check_rotation(rotation: [f64; 4], translation: [f64; 3], path: impl FnOnce() -> String) -> Result<f64> {
    RigidTransform::from_parts(rotation, translation).map_err(|e| Error::schema(path(), e.to_string()))?;
    Ok(yaw_from_quaternion(rotation))
}

fn attribute_from(name: String) -> Option<String> {
    (!name.is_empty()).then_some(name)
}

// ---------------------------------------------------------------- ground truth

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleRecord {
    pub sample_token: String,
    /// Microseconds.
    pub timestamp: i64,
    #[serde(default)]
    pub ego_translation: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneRecord {
    pub scene_token: String,
    #[serde(default = "default_rate")]
    pub keyframe_rate: f64,
    pub samples: Vec<SampleRecord>,
}

fn default_rate() -> f64 {
    DEFAULT_KEYFRAME_RATE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotationRecord {
    pub instance_token: String,
    /// General class name, with or without its taxonomy prefix.
    pub category_name: String,
    #[serde(default)]
    pub attribute_name: String,
    #[serde(default)]
    pub num_lidar_pts: Option<u32>,
    #[serde(default)]
    pub num_radar_pts: Option<u32>,
    pub translation: [f64; 3],
    pub size: [f64; 3],
    pub rotation: [f64; 4],
    #[serde(default)]
    pub velocity: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruthFile {
    pub scenes: Vec<SceneRecord>,
    /// Keyed by sample token.
    pub annotations: BTreeMap<String, Vec<AnnotationRecord>>,
}

impl GroundTruthFile {
    pub fn parse(text: &str) -> Result<Self> {
        parse_json(text)
    }

    /// Validated scenes and ground truth. Annotations of classes outside the
    /// detection taxonomy are dropped, except bike racks, which become
    /// ignore regions.
    pub fn into_model(self) -> Result<(Vec<Scene>, EvalSet<GroundTruthBox>)> {
        let scenes: Vec<Scene> = self
            .scenes
            .into_iter()
            .map(|s| Scene {
                scene_id: s.scene_token,
                keyframe_rate: s.keyframe_rate,
                samples: s
                    .samples
                    .into_iter()
                    .map(|r| SampleInfo {
                        sample_id: r.sample_token,
                        timestamp: r.timestamp,
                        ego_translation: r.ego_translation,
                    })
                    .collect(),
            })
            .collect();
        validate_scenes(&scenes)?;

        let mut boxes = Vec::new();
        for (sample, anns) in self.annotations {
            for (i, a) in anns.into_iter().enumerate() {
                let path = |field: &str| format!("annotations[{sample:?}][{i}].{field}");
                let category = map_category(&a.category_name)
                    .map_err(|_| Error::schema(path("category_name"), format!("unknown category `{}`", a.category_name)))?;
                let (class, ignore) = match category.detection {
                    Some(c) => (c, false),
                    None if category.general_name == IGNORE_REGION_CLASS => (DetectionClass::Bicycle, true),
                    None => continue,
                };
                let yaw = check_rotation(a.rotation, a.translation, || path("rotation"))?;
                let mut base = BoxRecord::new(sample.clone(), class, a.translation, a.size, yaw);
                base.velocity = a.velocity;
                base.attribute = attribute_from(a.attribute_name);
                let mut b = GroundTruthBox::new(base, a.instance_token);
                b.num_sensor_points = match (a.num_lidar_pts, a.num_radar_pts) {
                    (None, None) => None,
                    (l, r) => Some(l.unwrap_or(0) + r.unwrap_or(0)),
                };
                b.is_ignore_region = ignore;
                boxes.push(b);
            }
        }
        let gt = validate_ground_truth(boxes, &scenes)?;
        Ok((scenes, gt))
    }

    pub fn from_model(scenes: &[Scene], gt: &EvalSet<GroundTruthBox>) -> Self {
        let scenes_out = scenes
            .iter()
            .map(|s| SceneRecord {
                scene_token: s.scene_id.clone(),
                keyframe_rate: s.keyframe_rate,
                samples: s
                    .samples
                    .iter()
                    .map(|r| SampleRecord {
                        sample_token: r.sample_id.clone(),
                        timestamp: r.timestamp,
                        ego_translation: r.ego_translation,
                    })
                    .collect(),
            })
            .collect();
        let annotations = gt
            .iter()
            .map(|(sample, boxes)| {
                let anns = boxes
                    .iter()
                    .map(|b| AnnotationRecord {
                        instance_token: b.instance_id.clone(),
                        category_name: if b.is_ignore_region {
                            format!("static_object.{IGNORE_REGION_CLASS}")
                        } else {
                            b.base.category.canonical_general_name().to_string()
                        },
                        attribute_name: b.base.attribute.clone().unwrap_or_default(),
                        num_lidar_pts: b.num_sensor_points,
                        num_radar_pts: b.num_sensor_points.map(|_| 0),
                        translation: b.base.translation,
                        size: b.base.size,
                        rotation: quaternion_from_yaw(b.base.yaw),
                        velocity: b.base.velocity,
                    })
                    .collect();
                (sample.clone(), anns)
            })
            .collect();
        GroundTruthFile {
            scenes: scenes_out,
            annotations,
        }
    }
}

// ---------------------------------------------------------------- submissions

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubmissionMeta {
    pub use_camera: bool,
    pub use_lidar: bool,
    pub use_radar: bool,
    pub use_map: bool,
    pub use_external: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionRecord {
    pub sample_token: String,
    pub translation: [f64; 3],
    pub size: [f64; 3],
    pub rotation: [f64; 4],
    #[serde(default)]
    pub velocity: Option<[f64; 2]>,
    pub detection_name: DetectionClass,
    pub detection_score: f64,
    #[serde(default)]
    pub attribute_name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackRecord {
    pub sample_token: String,
    pub translation: [f64; 3],
    pub size: [f64; 3],
    pub rotation: [f64; 4],
    #[serde(default)]
    pub velocity: Option<[f64; 2]>,
    pub tracking_name: DetectionClass,
    pub tracking_score: f64,
    pub tracking_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubmissionFile<B> {
    pub meta: SubmissionMeta,
    /// Keyed by sample token.
    pub results: BTreeMap<String, Vec<B>>,
}

pub type DetectionSubmission = SubmissionFile<DetectionRecord>;
pub type TrackingSubmission = SubmissionFile<TrackRecord>;

impl<B: DeserializeOwned> SubmissionFile<B> {
    pub fn parse(text: &str) -> Result<Self> {
        parse_json(text)
    }
}

/// Common geometry of both submission record kinds.
trait RecordGeometry {
    fn sample_token(&self) -> &str;
    fn pose(&self) -> ([f64; 3], [f64; 3], [f64; 4], Option<[f64; 2]>);
}

impl RecordGeometry for DetectionRecord {
    fn sample_token(&self) -> &str {
        &self.sample_token
    }

    fn pose(&self) -> ([f64; 3], [f64; 3], [f64; 4], Option<[f64; 2]>) {
        (self.translation, self.size, self.rotation, self.velocity)
    }
}

impl RecordGeometry for TrackRecord {
    fn sample_token(&self) -> &str {
        &self.sample_token
    }

    fn pose(&self) -> ([f64; 3], [f64; 3], [f64; 4], Option<[f64; 2]>) {
        (self.translation, self.size, self.rotation, self.velocity)
    }
}

fn record_base<B: RecordGeometry>(sample: &str, i: usize, r: &B, class: DetectionClass) -> Result<BoxRecord> {
    let path = |field: &str| format!("results[{sample:?}][{i}].{field}");
    if r.sample_token() != sample {
        return Err(Error::schema(
            path("sample_token"),
            format!("`{}` differs from the enclosing sample `{sample}`", r.sample_token()),
        ));
    }
    let (translation, size, rotation, velocity) = r.pose();
    let yaw = check_rotation(rotation, translation, || path("rotation"))?;
    let mut base = BoxRecord::new(sample, class, translation, size, yaw);
    base.velocity = velocity;
    Ok(base)
}

impl DetectionSubmission {
    pub fn into_model(self, scenes: &[Scene]) -> Result<EvalSet<DetectionBox>> {
        let mut boxes = Vec::new();
        for (sample, records) in &self.results {
            for (i, r) in records.iter().enumerate() {
                let mut base = record_base(sample, i, r, r.detection_name)?;
                base.attribute = attribute_from(r.attribute_name.clone());
                boxes.push(DetectionBox {
                    base,
                    score: r.detection_score,
                });
            }
        }
        Ok(validate_detections(boxes, scenes)?)
    }

    pub fn from_model(meta: SubmissionMeta, set: &EvalSet<DetectionBox>) -> Self {
        let results = set
            .iter()
            .map(|(sample, boxes)| {
                let records = boxes
                    .iter()
                    .map(|b| DetectionRecord {
                        sample_token: sample.clone(),
                        translation: b.base.translation,
                        size: b.base.size,
                        rotation: quaternion_from_yaw(b.base.yaw),
                        velocity: b.base.velocity,
                        detection_name: b.base.category,
                        detection_score: b.score,
                        attribute_name: b.base.attribute.clone().unwrap_or_default(),
                    })
                    .collect();
                (sample.clone(), records)
            })
            .collect();
        SubmissionFile { meta, results }
    }
}

impl TrackingSubmission {
    pub fn into_model(self, scenes: &[Scene]) -> Result<EvalSet<TrackBox>> {
        let mut boxes = Vec::new();
        for (sample, records) in &self.results {
            for (i, r) in records.iter().enumerate() {
                let base = record_base(sample, i, r, r.tracking_name)?;
                boxes.push(TrackBox {
                    base,
                    score: r.tracking_score,
                    tracking_id: r.tracking_id.clone(),
                });
            }
        }
        Ok(validate_tracks(boxes, scenes)?)
    }

    pub fn from_model(meta: SubmissionMeta, set: &EvalSet<TrackBox>) -> Self {
        let results = set
            .iter()
            .map(|(sample, boxes)| {
                let records = boxes
                    .iter()
                    .map(|b| TrackRecord {
                        sample_token: sample.clone(),
                        translation: b.base.translation,
                        size: b.base.size,
                        rotation: quaternion_from_yaw(b.base.yaw),
                        velocity: b.base.velocity,
                        tracking_name: b.base.category,
                        tracking_score: b.score,
                        tracking_id: b.tracking_id.clone(),
                    })
                    .collect();
                (sample.clone(), records)
            })
            .collect();
        SubmissionFile { meta, results }
    }
}

// ---------------------------------------------------------------- sweeps

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRecord {
    /// Microseconds.
    pub timestamp: i64,
    /// Sensor-to-global rotation (w, x, y, z).
    pub rotation: [f64; 4],
    pub translation: [f64; 3],
    /// (x, y, z, intensity) in the sensor frame.
    pub points: Vec<[f64; 4]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepsFile {
    /// Keyed by keyframe sample token.
    pub sweeps: BTreeMap<String, Vec<SweepRecord>>,
}

impl SweepsFile {
    pub fn parse(text: &str) -> Result<Self> {
        parse_json(text)
    }

    pub fn into_model(self) -> Result<BTreeMap<String, Vec<Sweep>>> {
        self.sweeps
            .into_iter()
            .map(|(sample, records)| {
                let sweeps = records
                    .into_iter()
                    .enumerate()
                    .map(|(i, r)| {
                        let pose = RigidTransform::from_parts(r.rotation, r.translation)
                            .map_err(|e| Error::schema(format!("sweeps[{sample:?}][{i}].rotation"), e.to_string()))?;
                        Ok(Sweep {
                            points: r.points,
                            timestamp: r.timestamp,
                            sensor_to_global: pose,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok((sample, sweeps))
            })
            .collect()
    }

    pub fn from_model(sweeps: &BTreeMap<String, Vec<Sweep>>) -> Self {
        let sweeps = sweeps
            .iter()
            .map(|(sample, list)| {
                let records = list
                    .iter()
                    .map(|s| SweepRecord {
                        timestamp: s.timestamp,
                        rotation: s.sensor_to_global.rotation_wxyz(),
                        translation: s.sensor_to_global.translation(),
                        points: s.points.clone(),
                    })
                    .collect();
                (sample.clone(), records)
            })
            .collect();
        SweepsFile { sweeps }
    }
}
