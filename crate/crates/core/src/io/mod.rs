//! Interchange file formats.

mod formats;
pub mod mask;

pub use formats::{
    parse_json, to_json, AnnotationRecord, DetectionRecord, DetectionSubmission, GroundTruthFile,
    SampleRecord, SceneRecord, SubmissionFile, SubmissionMeta, SweepRecord, SweepsFile, TrackRecord,
    TrackingSubmission,
};
pub use mask::{RasterMask, RasterMaskFile, DEFAULT_MASK_RESOLUTION};
