//! Detection scoring: center-distance AP, the five TP error metrics, their
//! class means and the combined detection score (NDS).
//!
//! AP is the mean, over recall-grid points above `min_recall`, of precision
//! clipped at `min_precision` and rescaled to [0, 1]. TP errors are computed
//! on matches at `tp_distance` and averaged over the cumulative-mean series
//! at achieved recalls above `min_recall`; a class that never reaches
//! `min_recall` gets 1 for every TP error.

mod study;

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use study::{matching_study, StudyRow};

use crate::error::{Error, Result};
use crate::geometry::{
    center_distance_2d, scale_iou, velocity_error, yaw_diff, FULL_TURN, HALF_TURN,
};
use crate::matching::{
    grid_index_above, match_greedy, pr_curve, tp_error_curves, MatchKind, MatchMetric, MatchSet,
    PrCurve, TpErrors,
};
use crate::model::{
    BoxRecord, DetectionBox, DetectionClass, EvalConfig, EvalSet, GroundTruthBox, TpMetric,
};

/// Area under the interpolated PR curve above the recall and precision floors.
pub fn calc_ap(curve: &PrCurve, min_recall: f64, min_precision: f64) -> f64 {
    let n = curve.precision.len();
    let first = grid_index_above(min_recall, n);
    if first >= n {
        return 0.0;
    }
    let tail = &curve.precision[first..];
    if !tail.iter().any(|&p| p > min_precision) {
        return 0.0;
    }
    let total: f64 = tail
        .iter()
        .map(|&p| ((p - min_precision) / (1.0 - min_precision)).max(0.0))
        .sum();
    (total / tail.len() as f64).clamp(0.0, 1.0)
}

/// Mean of a cumulative-mean series over achieved grid points above
/// `min_recall`; 1 if that recall is never exceeded.
pub fn calc_tp_metric(series: &[Option<f64>], max_recall: f64, min_recall: f64) -> f64 {
    if max_recall <= min_recall {
        return 1.0;
    }
    let first = grid_index_above(min_recall, series.len());
    let values: Vec<f64> = series.iter().skip(first).flatten().copied().collect();
    if values.is_empty() {
        return 1.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// TP errors of one matched (ground truth, prediction) pair.
pub fn per_match_errors(gt: &BoxRecord, pred: &BoxRecord, config: &EvalConfig) -> TpErrors {
    let category = gt.category;
    let applicable = |m| config.is_applicable(category, m);
    let mut e = [None; 5];
    e[TpMetric::Ate.index()] = Some(center_distance_2d(gt, pred));
    e[TpMetric::Ase.index()] = Some(1.0 - scale_iou(gt.size, pred.size));
    if applicable(TpMetric::Aoe) {
        let period = if config.half_period_yaw.contains(&category) {
            HALF_TURN
        } else {
            FULL_TURN
        };
        e[TpMetric::Aoe.index()] = Some(yaw_diff(gt.yaw, pred.yaw, period));
    }
    if applicable(TpMetric::Ave) {
        e[TpMetric::Ave.index()] = velocity_error(gt, pred);
    }
    if applicable(TpMetric::Aae) {
        // ground truth without an attribute carries no information
        e[TpMetric::Aae.index()] = gt.attribute.as_ref().map(|a| {
            if pred.attribute.as_ref() == Some(a) {
                0.0
            } else {
                1.0
            }
        });
    }
    if !applicable(TpMetric::Ate) {
        e[TpMetric::Ate.index()] = None;
    }
    if !applicable(TpMetric::Ase) {
        e[TpMetric::Ase.index()] = None;
    }
    TpErrors(e)
}

/// NDS = (5 mAP + sum over TP metrics of (1 - min(1, mTP))) / 10.
pub fn nds(mean_ap: f64, mean_tp: &[f64; 5]) -> f64 {
    let tp_score: f64 = mean_tp.iter().map(|v| 1.0 - v.min(1.0)).sum();
    (5.0 * mean_ap + tp_score) / 10.0
}

/// AP per matching threshold and TP errors (`None` = not applicable) of one
/// class, the input to [`aggregate`].
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryRow {
    pub category: DetectionClass,
    pub ap_per_threshold: Vec<f64>,
    pub tp: [Option<f64>; 5],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub mean_ap: f64,
    /// Class mean of each TP metric; 1 when no class defines the metric.
    pub mean_tp: [f64; 5],
    pub nds: f64,
}

/// Means over classes and thresholds, then NDS.
pub fn aggregate(rows: &[CategoryRow]) -> Result<Summary> {
    if rows.is_empty() {
        return Err(Error::Config("no categories to aggregate".into()));
    }
    let thresholds = rows[0].ap_per_threshold.len();
    if thresholds == 0 || rows.iter().any(|r| r.ap_per_threshold.len() != thresholds) {
        return Err(Error::Config(
            "every category needs an AP for every threshold".into(),
        ));
    }
    let ap_sum: f64 = rows.iter().flat_map(|r| &r.ap_per_threshold).sum();
    let mean_ap = ap_sum / (rows.len() * thresholds) as f64;
    let mut mean_tp = [1.0; 5];
    for (k, slot) in mean_tp.iter_mut().enumerate() {
        let defined: Vec<f64> = rows.iter().filter_map(|r| r.tp[k]).collect();
        if !defined.is_empty() {
            *slot = defined.iter().sum::<f64>() / defined.len() as f64;
        }
    }
    Ok(Summary {
        mean_ap,
        mean_tp,
        nds: nds(mean_ap, &mean_tp),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdAp {
    pub threshold: f64,
    pub ap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryDetection {
    pub num_gt: usize,
    pub num_pred: usize,
    pub ap: Vec<ThresholdAp>,
    pub mean_ap: f64,
    /// `null` marks a metric that is not applicable to the class.
    pub tp_errors: BTreeMap<TpMetric, Option<f64>>,
}

impl CategoryDetection {
    fn row(&self, category: DetectionClass) -> CategoryRow {
        let mut tp = [None; 5];
        for m in TpMetric::ALL {
            tp[m.index()] = self.tp_errors.get(&m).copied().flatten();
        }
        CategoryRow {
            category,
            ap_per_threshold: self.ap.iter().map(|a| a.ap).collect(),
            tp,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionMetrics {
    pub matcher: MatchKind,
    pub mean_ap: f64,
    pub mean_tp: BTreeMap<TpMetric, f64>,
    pub nds: f64,
    pub per_category: BTreeMap<DetectionClass, CategoryDetection>,
    /// Requested classes without ground truth; excluded from every mean.
    pub skipped_categories: Vec<DetectionClass>,
}

/// Boxes of one class, sample by sample, in sample order.
pub(crate) struct ClassSlices<'a> {
    pub gts: Vec<Vec<&'a GroundTruthBox>>,
    pub preds: Vec<Vec<&'a DetectionBox>>,
}

impl ClassSlices<'_> {
    pub fn num_gt(&self) -> usize {
        self.gts.iter().map(Vec::len).sum()
    }

    pub fn num_pred(&self) -> usize {
        self.preds.iter().map(Vec::len).sum()
    }

    pub fn match_all(&self, metric: &MatchMetric) -> Vec<MatchSet> {
        self.gts
            .iter()
            .zip(&self.preds)
            .map(|(g, p)| match_greedy(g, p, metric))
            .collect()
    }
}

pub(crate) fn class_slices<'a>(
    gt: &'a EvalSet<GroundTruthBox>,
    preds: &'a EvalSet<DetectionBox>,
    category: DetectionClass,
) -> ClassSlices<'a> {
    let samples: BTreeSet<&String> = gt.keys().chain(preds.keys()).collect();
    let mut out = ClassSlices {
        gts: Vec::with_capacity(samples.len()),
        preds: Vec::with_capacity(samples.len()),
    };
    for s in samples {
        out.gts.push(
            gt.get(s)
                .into_iter()
                .flatten()
                .filter(|b| b.base.category == category && !b.is_ignore_region)
                .collect(),
        );
        out.preds.push(
            preds
                .get(s)
                .into_iter()
                .flatten()
                .filter(|b| b.base.category == category)
                .collect(),
        );
    }
    out
}

/// Average precision of one class under one match predicate.
pub(crate) fn class_ap(
    slices: &ClassSlices<'_>,
    metric: &MatchMetric,
    config: &EvalConfig,
) -> (f64, Vec<MatchSet>) {
    let sets = slices.match_all(metric);
    let ap = pr_curve(&sets, config.recall_samples)
        .map_or(0.0, |c| calc_ap(&c, config.min_recall, config.min_precision));
    (ap, sets)
}

fn evaluate_class(
    slices: &ClassSlices<'_>,
    category: DetectionClass,
    config: &EvalConfig,
    matcher: MatchKind,
) -> Result<CategoryDetection> {
    let thresholds: Vec<f64> = match matcher {
        MatchKind::CenterDistance => config.distance_thresholds.clone(),
        _ => vec![config.iou_threshold(category)],
    };
    let mut ap = Vec::with_capacity(thresholds.len());
    let mut tp_sets = None;
    for &t in &thresholds {
        let metric = MatchMetric::new(matcher, t)?;
        let (value, sets) = class_ap(slices, &metric, config);
        if matcher == MatchKind::CenterDistance && t == config.tp_distance {
            tp_sets = Some(sets);
        }
        ap.push(ThresholdAp {
            threshold: t,
            ap: value,
        });
    }
    let mut sets = match tp_sets {
        Some(s) => s,
        None => slices.match_all(&MatchMetric::center_distance(config.tp_distance)?),
    };
    for (set, (g, p)) in sets.iter_mut().zip(slices.gts.iter().zip(&slices.preds)) {
        for m in &mut set.matches {
            m.errors = per_match_errors(&g[m.gt].base, &p[m.pred].base, config);
        }
    }
    let curves = tp_error_curves(&sets, config.recall_samples);
    let tp_errors = TpMetric::ALL
        .into_iter()
        .map(|m| {
            let value = config.is_applicable(category, m).then(|| {
                calc_tp_metric(curves.series(m), curves.max_recall, config.min_recall)
            });
            (m, value)
        })
        .collect();
    let mean_ap = ap.iter().map(|a| a.ap).sum::<f64>() / ap.len() as f64;
    Ok(CategoryDetection {
        num_gt: slices.num_gt(),
        num_pred: slices.num_pred(),
        ap,
        mean_ap,
        tp_errors,
    })
}

/// Full detection evaluation over validated, filtered inputs. AP uses the
/// given matcher (center distance at every configured threshold, or IOU at
/// the per-class threshold); TP errors always use center distance at
/// `tp_distance`.
pub fn evaluate_detection(
    gt: &EvalSet<GroundTruthBox>,
    preds: &EvalSet<DetectionBox>,
    config: &EvalConfig,
    matcher: MatchKind,
) -> Result<DetectionMetrics> {
    config.validate()?;
    let categories: Vec<DetectionClass> = config
        .categories
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let results: Vec<(DetectionClass, Option<CategoryDetection>)> = categories
        .par_iter()
        .map(|&c| {
            let slices = class_slices(gt, preds, c);
            if slices.num_gt() == 0 {
                return Ok((c, None));
            }
            evaluate_class(&slices, c, config, matcher).map(|r| (c, Some(r)))
        })
        .collect::<Result<_>>()?;

    let mut per_category = BTreeMap::new();
    let mut skipped = Vec::new();
    for (c, r) in results {
        match r {
            Some(r) => {
                per_category.insert(c, r);
            }
            None => skipped.push(c),
        }
    }
    let rows: Vec<CategoryRow> = per_category.iter().map(|(c, r)| r.row(*c)).collect();
    let summary = aggregate(&rows).map_err(|_| {
        Error::Config("no evaluated category has ground truth after filtering".into())
    })?;
    Ok(DetectionMetrics {
        matcher,
        mean_ap: summary.mean_ap,
        mean_tp: TpMetric::ALL
            .into_iter()
            .map(|m| (m, summary.mean_tp[m.index()]))
            .collect(),
        nds: summary.nds,
        per_category,
        skipped_categories: skipped,
    })
}
