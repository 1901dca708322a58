//! Evaluation-set filtering: sensor-point, range, map-prior and ignore-region
//! rules applied before matching.

use std::collections::HashMap;

use super::config::EvalConfig;
use super::types::{AsBox, BoxRecord, EvalSet, GroundTruthBox, Scene};
use crate::io::mask::RasterMask;

/// Ego positions keyed by sample token.
pub fn ego_positions(scenes: &[Scene]) -> HashMap<&str, [f64; 3]> {
    scenes
        .iter()
        .flat_map(|s| s.samples.iter())
        .map(|s| (s.sample_id.as_str(), s.ego_translation))
        .collect()
}

struct Rules<'a> {
    config: &'a EvalConfig,
    ego: HashMap<&'a str, [f64; 3]>,
    map_mask: Option<&'a RasterMask>,
}

impl Rules<'_> {
    fn keep(&self, record: &BoxRecord) -> bool {
        let ego = self
            .ego
            .get(record.sample_id.as_str())
            .copied()
            .unwrap_or([0.0; 3]);
        let range = (record.translation[0] - ego[0]).hypot(record.translation[1] - ego[1]);
        if range > self.config.max_range(record.category) {
            return false;
        }
        if let Some(mask) = self.map_mask {
            if !mask.within(
                record.translation[0],
                record.translation[1],
                self.config.map_max_distance,
            ) {
                return false;
            }
        }
        true
    }
}

/// Returns the filtered (ground truth, predictions) pair.
///
/// Ground truth without sensor points is dropped when the config requires
/// points. Boxes of both kinds beyond their class range from the ego vehicle,
/// or too far from the map mask, are dropped. Predictions centered inside an
/// ignore-region footprint are discarded, and ignore regions never appear in
/// the returned ground truth.
pub fn filter_eval_boxes<P: AsBox + Clone>(
    gt: &EvalSet<GroundTruthBox>,
    preds: &EvalSet<P>,
    scenes: &[Scene],
    config: &EvalConfig,
    map_mask: Option<&RasterMask>,
) -> (EvalSet<GroundTruthBox>, EvalSet<P>) {
    let rules = Rules {
        config,
        ego: ego_positions(scenes),
        map_mask,
    };

    let mut gt_out = EvalSet::new();
    for (sample, boxes) in gt {
        let kept: Vec<_> = boxes
            .iter()
            .filter(|b| !b.is_ignore_region)
            .filter(|b| !(config.require_sensor_points && b.num_sensor_points == Some(0)))
            .filter(|b| rules.keep(&b.base))
            .cloned()
            .collect();
        if !kept.is_empty() {
            gt_out.insert(sample.clone(), kept);
        }
    }

    let mut pred_out = EvalSet::new();
    for (sample, boxes) in preds {
        let regions: Vec<&GroundTruthBox> = gt
            .get(sample)
            .map(|g| g.iter().filter(|b| b.is_ignore_region).collect())
            .unwrap_or_default();
        let kept: Vec<_> = boxes
            .iter()
            .filter(|p| {
                let r = p.record();
                !regions
                    .iter()
                    .any(|g| g.base.footprint_contains(r.translation[0], r.translation[1]))
            })
            .filter(|p| rules.keep(p.record()))
            .cloned()
            .collect();
        if !kept.is_empty() {
            pred_out.insert(sample.clone(), kept);
        }
    }
    (gt_out, pred_out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::mask::RasterMaskFile;
    use crate::model::{DetectionBox, DetectionClass, SampleInfo};

    fn scene() -> Vec<Scene> {
        vec![Scene {
            scene_id: "sc".into(),
            samples: vec![SampleInfo {
                sample_id: "s".into(),
                timestamp: 0,
                ego_translation: [100.0, 0.0, 0.0],
            }],
            keyframe_rate: 2.0,
        }]
    }

    fn gt_at(x: f64, id: &str) -> GroundTruthBox {
        let mut g = GroundTruthBox::new(
            BoxRecord::new("s", DetectionClass::Car, [x, 0.0, 0.0], [2.0, 4.0, 1.5], 0.0),
            id,
        );
        g.num_sensor_points = Some(5);
        g
    }

    fn det_at(x: f64, y: f64) -> DetectionBox {
        DetectionBox {
            base: BoxRecord::new("s", DetectionClass::Car, [x, y, 0.0], [2.0, 4.0, 1.5], 0.0),
            score: 0.5,
        }
    }

    fn set<T>(v: Vec<T>) -> EvalSet<T> {
        EvalSet::from([("s".to_string(), v)])
    }

    #[test]
    fn sensor_points_rule() {
        let mut empty = gt_at(101.0, "a");
        empty.num_sensor_points = Some(0);
        let mut unknown = gt_at(102.0, "b");
        unknown.num_sensor_points = None;
        let gt = set(vec![empty, unknown]);
        let preds: EvalSet<DetectionBox> = EvalSet::new();
        let cfg = EvalConfig::default();
        let (g, _) = filter_eval_boxes(&gt, &preds, &scene(), &cfg, None);
        assert_eq!(g["s"].len(), 1);
        assert_eq!(g["s"][0].instance_id, "b");

        let cfg = EvalConfig {
            require_sensor_points: false,
            ..Default::default()
        };
        let (g, _) = filter_eval_boxes(&gt, &preds, &scene(), &cfg, None);
        assert_eq!(g["s"].len(), 2);
    }

    #[test]
    fn range_is_ego_relative() {
        // ego at x = 100; car at x = 220 is 120 m away
        let gt = set(vec![gt_at(220.0, "far"), gt_at(130.0, "near")]);
        let preds = set(vec![det_at(220.0, 0.0), det_at(60.0, 0.0)]);
        let cfg = EvalConfig::default();
        let (g, p) = filter_eval_boxes(&gt, &preds, &scene(), &cfg, None);
        assert_eq!(g["s"].len(), 1);
        assert_eq!(g["s"][0].instance_id, "near");
        assert_eq!(p["s"].len(), 1);
        assert_eq!(p["s"][0].base.translation[0], 60.0);
    }

    #[test]
    fn ignore_region_discards_predictions_and_itself() {
        let mut rack = gt_at(110.0, "rack");
        rack.is_ignore_region = true;
        rack.base.size = [2.0, 6.0, 1.0];
        let gt = set(vec![rack, gt_at(120.0, "car")]);
        let preds = set(vec![det_at(111.0, 0.5), det_at(120.0, 0.0), det_at(125.0, 0.0)]);
        let (g, p) = filter_eval_boxes(&gt, &preds, &scene(), &EvalConfig::default(), None);
        assert_eq!(g["s"].len(), 1);
        assert_eq!(p["s"].len(), 2);
        assert!(p["s"].iter().all(|d| d.base.translation[0] >= 120.0));
    }

    #[test]
    fn map_mask_rule() {
        let mask = RasterMaskFile {
            origin: [100.0, -1.0],
            resolution: 10.0,
            width: 200,
            height: 20,
            rows: vec!["1".repeat(200); 20],
        }
        .into_mask()
        .unwrap();
        let gt = set(vec![gt_at(110.0, "on"), gt_at(130.0, "off")]);
        let preds: EvalSet<DetectionBox> = set(vec![det_at(110.0, 3.0), det_at(110.0, 0.0)]);
        let cfg = EvalConfig::default();
        let (g, p) = filter_eval_boxes(&gt, &preds, &scene(), &cfg, Some(&mask));
        assert_eq!(g["s"].len(), 1);
        assert_eq!(p["s"].len(), 1);

        let cfg = EvalConfig {
            map_max_distance: 2.5,
            ..Default::default()
        };
        let (_, p) = filter_eval_boxes(&gt, &preds, &scene(), &cfg, Some(&mask));
        assert_eq!(p["s"].len(), 2);
    }
}
