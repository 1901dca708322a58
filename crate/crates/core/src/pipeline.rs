//! Text-in, text-out entry points shared by the command-line tool and any
//! embedding. Each takes document texts and returns the exact bytes a
//! command would write, so every front end produces identical output.

use serde::{Deserialize, Serialize};

use crate::detection::{evaluate_detection, matching_study, DetectionMetrics};
use crate::error::{Error, Result};
use crate::io::{
    parse_json, to_json, DetectionSubmission, GroundTruthFile, RasterMask, RasterMaskFile,
    SubmissionMeta, SweepsFile, TrackingSubmission,
};
use crate::matching::MatchKind;
use crate::model::{filter_eval_boxes, DetectionClass, EvalConfig};
use crate::report::{detection_table, study_csv, tracking_table};
use crate::synth::{generate_scenes, perturb_detections, perturb_tracks, NoiseModel, SynthConfig};
use crate::tracking::{evaluate_tracking, TrackingMetrics};

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOptions {
    /// Restricts evaluation to these classes (intersected with the config).
    pub categories: Option<Vec<DetectionClass>>,
    pub matcher: MatchKind,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            categories: None,
            matcher: MatchKind::CenterDistance,
        }
    }
}

/// Metrics plus their serialized forms.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation<M> {
    pub metrics: M,
    /// Results file contents.
    pub json: String,
    /// Human-readable summary.
    pub table: String,
}

/// Parses a configuration (defaults when absent) and applies the class filter.
pub fn load_config(text: Option<&str>, categories: Option<&[DetectionClass]>) -> Result<EvalConfig> {
    let mut config: EvalConfig = match text {
        Some(t) => parse_json(t)?,
        None => EvalConfig::default(),
    };
    if let Some(keep) = categories {
        config.categories.retain(|c| keep.contains(c));
        if config.categories.is_empty() {
            return Err(Error::Config("no configured class survives the category filter".into()));
        }
    }
    config.validate()?;
    Ok(config)
}

fn load_mask(text: Option<&str>) -> Result<Option<RasterMask>> {
    text.map(|t| parse_json::<RasterMaskFile>(t)?.into_mask()).transpose()
}

pub fn evaluate_detection_text(
    gt_text: &str,
    submission_text: &str,
    config_text: Option<&str>,
    mask_text: Option<&str>,
    options: &EvalOptions,
) -> Result<Evaluation<DetectionMetrics>> {
    let config = load_config(config_text, options.categories.as_deref())?;
    let (scenes, gt) = GroundTruthFile::parse(gt_text)?.into_model()?;
    let preds = DetectionSubmission::parse(submission_text)?.into_model(&scenes)?;
    let mask = load_mask(mask_text)?;
    let (gt, preds) = filter_eval_boxes(&gt, &preds, &scenes, &config, mask.as_ref());
    let metrics = evaluate_detection(&gt, &preds, &config, options.matcher)?;
    Ok(Evaluation {
        json: to_json(&metrics),
        table: detection_table(&metrics),
        metrics,
    })
}

pub fn evaluate_tracking_text(
    gt_text: &str,
    submission_text: &str,
    config_text: Option<&str>,
    mask_text: Option<&str>,
    options: &EvalOptions,
) -> Result<Evaluation<TrackingMetrics>> {
    let config = load_config(config_text, options.categories.as_deref())?;
    let (scenes, gt) = GroundTruthFile::parse(gt_text)?.into_model()?;
    let preds = TrackingSubmission::parse(submission_text)?.into_model(&scenes)?;
    let mask = load_mask(mask_text)?;
    let (gt, preds) = filter_eval_boxes(&gt, &preds, &scenes, &config, mask.as_ref());
    let metrics = evaluate_tracking(&scenes, &gt, &preds, &config)?;
    Ok(Evaluation {
        json: to_json(&metrics),
        table: tracking_table(&metrics),
        metrics,
    })
}

/// AP per class under center distance at every threshold and under the
/// given IOU matcher, as CSV.
pub fn compare_matchers_text(
    gt_text: &str,
    submission_text: &str,
    config_text: Option<&str>,
    mask_text: Option<&str>,
    categories: Option<&[DetectionClass]>,
    iou_kind: MatchKind,
) -> Result<String> {
    let config = load_config(config_text, categories)?;
    let (scenes, gt) = GroundTruthFile::parse(gt_text)?.into_model()?;
    let preds = DetectionSubmission::parse(submission_text)?.into_model(&scenes)?;
    let mask = load_mask(mask_text)?;
    let (gt, preds) = filter_eval_boxes(&gt, &preds, &scenes, &config, mask.as_ref());
    let rows = matching_study(&gt, &preds, &config, iou_kind)?;
    Ok(study_csv(&rows))
}

/// Input of the synth command: a scenario and one noise model per
/// submission kind. Both submissions use the scenario seed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub scenario: SynthConfig,
    pub detection_noise: NoiseModel,
    pub tracking_noise: NoiseModel,
}

/// Contents of the files written by the synth command.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthFiles {
    pub gt: String,
    pub detections: String,
    pub tracks: String,
    pub sweeps: String,
}

impl SynthFiles {
    /// (file name, contents) in a fixed order.
    pub fn named(&self) -> [(&'static str, &str); 4] {
        [
            ("gt.json", &self.gt),
            ("detections.json", &self.detections),
            ("tracks.json", &self.tracks),
            ("sweeps.json", &self.sweeps),
        ]
    }
}

pub fn generate_synth_text(spec_text: &str) -> Result<SynthFiles> {
    let spec: SynthSpec = parse_json(spec_text)?;
    spec.detection_noise.validate()?;
    spec.tracking_noise.validate()?;
    let s = generate_scenes(&spec.scenario)?;
    let seed = spec.scenario.seed;
    let dets = perturb_detections(&s.gt, &spec.detection_noise, seed)?;
    let tracks = perturb_tracks(&s.scenes, &s.gt, &spec.tracking_noise, seed)?;
    let meta = SubmissionMeta {
        use_lidar: true,
        ..Default::default()
    };
    Ok(SynthFiles {
        gt: to_json(&GroundTruthFile::from_model(&s.scenes, &s.gt)),
        detections: to_json(&DetectionSubmission::from_model(meta.clone(), &dets)),
        tracks: to_json(&TrackingSubmission::from_model(meta, &tracks)),
        sweeps: to_json(&SweepsFile::from_model(&s.sweeps)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(noise: &str) -> String {
        format!(
            r#"{{"scenario": {{"n_scenes": 2, "n_frames_per_scene": 6, "n_objects": 10, "sweeps_per_keyframe": 1, "seed": 3}},
                "detection_noise": {noise}, "tracking_noise": {noise}}}"#
        )
    }

    #[test]
    fn self_evaluation_through_text() {
        let files = generate_synth_text(&spec("{}")).unwrap();
        let det = evaluate_detection_text(&files.gt, &files.detections, None, None, &EvalOptions::default()).unwrap();
        assert_eq!(det.metrics.nds, 1.0);
        assert!(det.table.contains("NDS:  1.0000"));
        let trk = evaluate_tracking_text(&files.gt, &files.tracks, None, None, &EvalOptions::default()).unwrap();
        assert_eq!(trk.metrics.amota, 1.0);
        let back: TrackingMetrics = parse_json(&trk.json).unwrap();
        assert_eq!(back, trk.metrics);
        let back: DetectionMetrics = parse_json(&det.json).unwrap();
        assert_eq!(back, det.metrics);
    }

    #[test]
    fn synth_text_is_deterministic() {
        let s = spec(r#"{"sigma_translation": 0.2, "clutter_rate": 1.0, "id_switch_prob": 0.05}"#);
        assert_eq!(generate_synth_text(&s).unwrap(), generate_synth_text(&s).unwrap());
    }

    #[test]
    fn category_filter() {
        let files = generate_synth_text(&spec("{}")).unwrap();
        let options = EvalOptions {
            categories: Some(vec![DetectionClass::Car, DetectionClass::Barrier]),
            ..Default::default()
        };
        let det = evaluate_detection_text(&files.gt, &files.detections, None, None, &options).unwrap();
        let classes: Vec<_> = det.metrics.per_category.keys().chain(&det.metrics.skipped_categories).copied().collect();
        assert!(classes.iter().all(|c| [DetectionClass::Car, DetectionClass::Barrier].contains(c)));
        assert!(matches!(
            load_config(None, Some(&[])),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn compare_rows() {
        let files = generate_synth_text(&spec(r#"{"sigma_translation": 0.3}"#)).unwrap();
        let csv = compare_matchers_text(&files.gt, &files.detections, None, None, None, MatchKind::Iou3d).unwrap();
        let det = evaluate_detection_text(&files.gt, &files.detections, None, None, &EvalOptions::default()).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "category,matcher,threshold,ap");
        assert_eq!(lines.len() - 1, det.metrics.per_category.len() * 5);
        assert!(lines[1..].iter().any(|l| l.contains(",iou_3d,")));
    }

    #[test]
    fn bad_inputs() {
        let files = generate_synth_text(&spec("{}")).unwrap();
        let opts = EvalOptions::default();
        assert!(matches!(
            evaluate_detection_text(&files.gt, "{", None, None, &opts),
            Err(Error::Schema { .. })
        ));
        assert!(matches!(
            evaluate_detection_text(&files.gt, &files.detections, Some(r#"{"tp_distance": 3.0}"#), None, &opts),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            evaluate_detection_text(&files.gt, &files.detections, Some(r#"{"bogus": 1}"#), None, &opts),
            Err(Error::Schema { .. })
        ));
        // a tracking file is not a detection submission
        assert!(evaluate_detection_text(&files.gt, &files.tracks, None, None, &opts).is_err());
        assert!(matches!(generate_synth_text(r#"{"scenario": {"n_objects": 0}}"#), Err(Error::Config(_))));
    }
}
