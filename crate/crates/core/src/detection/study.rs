use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{class_ap, class_slices};
use crate::error::{Error, Result};
use crate::matching::{MatchKind, MatchMetric};
use crate::model::{DetectionBox, DetectionClass, EvalConfig, EvalSet, GroundTruthBox};

/// One (class, matcher, threshold) cell of the matching-function comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub category: DetectionClass,
    pub matcher: MatchKind,
    pub threshold: f64,
    pub ap: f64,
}

/// AP of every class under center-distance matching at each configured
/// distance, and under IOU matching (`iou_kind`) at the class's IOU
/// threshold. Classes without ground truth are left out.
pub fn matching_study(
    gt: &EvalSet<GroundTruthBox>,
    preds: &EvalSet<DetectionBox>,
    config: &EvalConfig,
    iou_kind: MatchKind,
) -> Result<Vec<StudyRow>> {
    config.validate()?;
    if iou_kind == MatchKind::CenterDistance {
        return Err(Error::Config(
            "the comparison needs an IOU matcher (iou_bev or iou_3d)".into(),
        ));
    }
    let categories: BTreeSet<DetectionClass> = config.categories.iter().copied().collect();
    let mut rows = Vec::new();
    for category in categories {
        let slices = class_slices(gt, preds, category);
        if slices.num_gt() == 0 {
            continue;
        }
        let mut cells: Vec<(MatchKind, f64)> = config
            .distance_thresholds
            .iter()
            .map(|&d| (MatchKind::CenterDistance, d))
            .collect();
        cells.push((iou_kind, config.iou_threshold(category)));
        for (kind, threshold) in cells {
            let (ap, _) = class_ap(&slices, &MatchMetric::new(kind, threshold)?, config);
            rows.push(StudyRow {
                category,
                matcher: kind,
                threshold,
                ap,
            });
        }
    }
    Ok(rows)
}
