//! Domain types, class taxonomy, submission validation and evaluation-set
//! filtering shared by the detection and tracking evaluators.

mod config;
mod filter;
mod taxonomy;
mod types;
mod validate;

pub use config::{EvalConfig, TpMetric};
pub use filter::{ego_positions, filter_eval_boxes};
pub use taxonomy::{
    general_names, map_category, strip_prefix, Category, DetectionClass, IGNORE_REGION_CLASS,
};
pub use types::{
    normalize_yaw, AsBox, BoxRecord, DetectionBox, EvalSet, GroundTruthBox, SampleInfo, Scene,
    Scored, TrackBox, DEFAULT_KEYFRAME_RATE, KEYFRAME_JITTER,
};
pub use validate::{validate_detections, validate_ground_truth, validate_scenes, validate_tracks};
