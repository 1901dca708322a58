//! Multi-object tracking metrics: recall-averaged MOTAR (AMOTA), AMOTP, the
//! CLEAR-MOT block at the best recall threshold, and per-track TID / LGD.

mod timeline;

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use timeline::{tid_lgd, Timeline};

use crate::error::Result;
use crate::matching::{match_greedy, MatchMetric};
use crate::model::{DetectionClass, EvalConfig, EvalSet, GroundTruthBox, Scene, TrackBox};

/// Recall-normalized MOTA at recall `recall`, clamped to [0, 1]. `None`
/// without ground truth or outside 0 < recall <= 1.
pub fn motar(ids: usize, fp: usize, fn_: usize, recall: f64, num_gt: usize) -> Option<f64> {
    if num_gt == 0 || !(recall > 0.0 && recall <= 1.0) {
        return None;
    }
    let p = num_gt as f64;
    let errors = (ids + fp + fn_) as f64 - (1.0 - recall) * p;
    Some((1.0 - errors / (recall * p)).clamp(0.0, 1.0))
}

/// `n` evenly spaced recall targets from `min_recall` to 1.
pub fn recall_targets(min_recall: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| min_recall + (1.0 - min_recall) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Counts and metrics at one recall target of the sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdStats {
    pub recall_target: f64,
    /// Lowest score kept; `None` when the target recall is never reached.
    pub confidence_threshold: Option<f64>,
    pub achieved: bool,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub ids: usize,
    pub frag: usize,
    pub motar: f64,
    pub motp: f64,
    pub num_gt: usize,
}

/// (AMOTA, AMOTP, AMOTP over achieved targets only).
pub fn amota_amotp(sweep: &[ThresholdStats]) -> (f64, f64, Option<f64>) {
    if sweep.is_empty() {
        return (0.0, 0.0, None);
    }
    let n = sweep.len() as f64;
    let amota = sweep.iter().map(|s| s.motar).sum::<f64>() / n;
    let amotp = sweep.iter().map(|s| s.motp).sum::<f64>() / n;
    let achieved: Vec<f64> = sweep.iter().filter(|s| s.achieved).map(|s| s.motp).collect();
    let achieved_only = if achieved.is_empty() {
        None
    } else {
        Some(achieved.iter().sum::<f64>() / achieved.len() as f64)
    };
    (amota, amotp, achieved_only)
}

/// CLEAR-MOT style metrics at the recall threshold with the highest MOTAR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestThreshold {
    pub achieved: bool,
    pub recall_target: Option<f64>,
    pub confidence_threshold: Option<f64>,
    pub mota: f64,
    pub motp: f64,
    /// False alarms per frame.
    pub faf: f64,
    pub mt: usize,
    pub ml: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub ids: usize,
    pub frag: usize,
    /// Mean track initialization duration, seconds.
    pub tid: f64,
    /// Mean longest gap duration, seconds.
    pub lgd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryTracking {
    pub num_gt: usize,
    pub num_tracks: usize,
    pub num_pred: usize,
    pub amota: f64,
    pub amotp: f64,
    pub amotp_achieved_only: Option<f64>,
    pub best: BestThreshold,
    pub sweep: Vec<ThresholdStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingMetrics {
    pub amota: f64,
    pub amotp: f64,
    pub amotp_achieved_only: Option<f64>,
    pub mota: f64,
    pub motp: f64,
    pub faf: f64,
    pub tid: f64,
    pub lgd: f64,
    pub mt: usize,
    pub ml: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub ids: usize,
    pub frag: usize,
    pub per_category: BTreeMap<DetectionClass, CategoryTracking>,
    /// Classes without ground truth, left out of the means.
    pub skipped_categories: Vec<DetectionClass>,
}

struct Frame<'a> {
    time: f64,
    gts: Vec<&'a GroundTruthBox>,
    preds: Vec<&'a TrackBox>,
}

#[derive(Default)]
struct Run {
    tp: usize,
    fp: usize,
    fn_: usize,
    ids: usize,
    frag: usize,
    distance_sum: f64,
    tp_scores: Vec<f64>,
    tracks: Vec<Timeline>,
}

#[derive(Default)]
struct TrackState<'a> {
    timeline: Timeline,
    last_id: Option<&'a str>,
    tracked_prev: bool,
    ever_tracked: bool,
}

/// Frame-by-frame matching of the predictions scoring at least `threshold`,
/// with identity bookkeeping per ground-truth track.
fn run_threshold(scenes: &[Vec<Frame<'_>>], threshold: Option<f64>, metric: &MatchMetric) -> Run {
    let mut run = Run::default();
    for frames in scenes {
        let mut states: BTreeMap<&str, TrackState> = BTreeMap::new();
        for frame in frames {
            let kept: Vec<&TrackBox> = frame
                .preds
                .iter()
                .copied()
                .filter(|p| threshold.is_none_or(|t| p.score >= t))
                .collect();
            let set = match_greedy(&frame.gts, &kept, metric);
            run.fp += set.false_positives.len();
            run.fn_ += set.false_negatives.len();
            let mut matched_gt = vec![None; frame.gts.len()];
            for m in &set.matches {
                run.tp += 1;
                run.distance_sum += m.distance;
                run.tp_scores.push(m.score);
                matched_gt[m.gt] = Some(kept[m.pred].tracking_id.as_str());
            }
            for (gt, matched) in frame.gts.iter().zip(matched_gt) {
                let state = states.entry(gt.instance_id.as_str()).or_default();
                state.timeline.push(frame.time, matched.is_some());
                match matched {
                    Some(id) => {
                        if state.last_id.is_some_and(|last| last != id) {
                            run.ids += 1;
                        }
                        if state.ever_tracked && !state.tracked_prev {
                            run.frag += 1;
                        }
                        state.last_id = Some(id);
                        state.tracked_prev = true;
                        state.ever_tracked = true;
                    }
                    None => state.tracked_prev = false,
                }
            }
        }
        run.tracks.extend(states.into_values().map(|s| s.timeline));
    }
    run
}

fn group_frames<'a>(
    scenes: &[Scene],
    gt: &'a EvalSet<GroundTruthBox>,
    preds: &'a EvalSet<TrackBox>,
    category: DetectionClass,
) -> Vec<Vec<Frame<'a>>> {
    scenes
        .iter()
        .map(|scene| {
            scene
                .samples
                .iter()
                .map(|s| Frame {
                    time: s.timestamp as f64 * 1e-6,
                    gts: gt
                        .get(&s.sample_id)
                        .into_iter()
                        .flatten()
                        .filter(|g| g.base.category == category && !g.is_ignore_region)
                        .collect(),
                    preds: preds
                        .get(&s.sample_id)
                        .into_iter()
                        .flatten()
                        .filter(|p| p.base.category == category)
                        .collect(),
                })
                .collect()
        })
        .collect()
}

fn worst_block(num_gt: usize, num_tracks: usize, config: &EvalConfig, tracks: &[Timeline]) -> BestThreshold {
    let (tid, lgd) = tid_lgd(tracks);
    BestThreshold {
        achieved: false,
        recall_target: None,
        confidence_threshold: None,
        mota: 0.0,
        motp: config.tp_distance,
        faf: 0.0,
        mt: 0,
        ml: num_tracks,
        fp: 0,
        fn_: num_gt,
        ids: 0,
        frag: 0,
        tid,
        lgd,
    }
}

fn evaluate_category(
    frames: &[Vec<Frame<'_>>],
    config: &EvalConfig,
    metric: &MatchMetric,
) -> Option<CategoryTracking> {
    let num_gt: usize = frames.iter().flatten().map(|f| f.gts.len()).sum();
    if num_gt == 0 {
        return None;
    }
    let num_pred: usize = frames.iter().flatten().map(|f| f.preds.len()).sum();
    let num_frames: usize = frames.iter().map(Vec::len).sum();

    let full = run_threshold(frames, None, metric);
    let num_tracks = full.tracks.len();
    let mut scores = full.tp_scores.clone();
    scores.sort_by(|a, b| b.total_cmp(a));

    let targets = recall_targets(config.min_recall, config.tracking_recall_points);
    let thresholds: Vec<Option<f64>> = targets
        .iter()
        .map(|&r| {
            let k = ((r * num_gt as f64) - 1e-9).ceil().max(1.0) as usize;
            scores.get(k - 1).copied()
        })
        .collect();

    let mut distinct: Vec<f64> = thresholds.iter().flatten().copied().collect();
    distinct.sort_by(|a, b| b.total_cmp(a));
    distinct.dedup();
    let runs: HashMap<u64, Run> = distinct
        .par_iter()
        .map(|&t| (t.to_bits(), run_threshold(frames, Some(t), metric)))
        .collect();

    let sweep: Vec<ThresholdStats> = targets
        .iter()
        .zip(&thresholds)
        .map(|(&r, t)| match t {
            Some(t) => {
                let run = &runs[&t.to_bits()];
                ThresholdStats {
                    recall_target: r,
                    confidence_threshold: Some(*t),
                    achieved: true,
                    tp: run.tp,
                    fp: run.fp,
                    fn_: run.fn_,
                    ids: run.ids,
                    frag: run.frag,
                    motar: motar(run.ids, run.fp, run.fn_, r, num_gt).unwrap_or(0.0),
                    motp: run.distance_sum / run.tp as f64,
                    num_gt,
                }
            }
            None => ThresholdStats {
                recall_target: r,
                confidence_threshold: None,
                achieved: false,
                tp: 0,
                fp: 0,
                fn_: num_gt,
                ids: 0,
                frag: 0,
                motar: 0.0,
                motp: config.tp_distance,
                num_gt,
            },
        })
        .collect();
    let (amota, amotp, amotp_achieved_only) = amota_amotp(&sweep);

    // highest MOTAR; ties go to the higher recall
    let best_idx = sweep
        .iter()
        .enumerate()
        .filter(|(_, s)| s.achieved)
        .fold(None, |best: Option<usize>, (i, s)| match best {
            Some(b) if sweep[b].motar > s.motar => Some(b),
            _ => Some(i),
        });

    let best = match best_idx {
        None => worst_block(num_gt, num_tracks, config, &full.tracks),
        Some(i) => {
            let s = &sweep[i];
            let run = &runs[&s.confidence_threshold.unwrap_or_default().to_bits()];
            let (tid, lgd) = tid_lgd(&run.tracks);
            let coverage = |t: &Timeline| t.coverage();
            BestThreshold {
                achieved: true,
                recall_target: Some(s.recall_target),
                confidence_threshold: s.confidence_threshold,
                mota: 1.0 - (run.fn_ + run.fp + run.ids) as f64 / num_gt as f64,
                motp: s.motp,
                faf: run.fp as f64 / num_frames.max(1) as f64,
                mt: run
                    .tracks
                    .iter()
                    .filter(|t| coverage(t) >= config.mostly_tracked_ratio)
                    .count(),
                ml: run
                    .tracks
                    .iter()
                    .filter(|t| coverage(t) <= config.mostly_lost_ratio)
                    .count(),
                fp: run.fp,
                fn_: run.fn_,
                ids: run.ids,
                frag: run.frag,
                tid,
                lgd,
            }
        }
    };

    Some(CategoryTracking {
        num_gt,
        num_tracks,
        num_pred,
        amota,
        amotp,
        amotp_achieved_only,
        best,
        sweep,
    })
}

/// Evaluates tracks against ground truth over whole scenes. Both sets are
/// expected to be validated and filtered already.
pub fn evaluate_tracking(
    scenes: &[Scene],
    gt: &EvalSet<GroundTruthBox>,
    preds: &EvalSet<TrackBox>,
    config: &EvalConfig,
) -> Result<TrackingMetrics> {
    config.validate()?;
    let metric = MatchMetric::center_distance(config.tp_distance)?;
    let mut categories = config.tracking_categories();
    categories.sort();
    categories.dedup();

    let results: Vec<(DetectionClass, Option<CategoryTracking>)> = categories
        .par_iter()
        .map(|&c| {
            let frames = group_frames(scenes, gt, preds, c);
            (c, evaluate_category(&frames, config, &metric))
        })
        .collect();

    let mut per_category = BTreeMap::new();
    let mut skipped_categories = Vec::new();
    for (c, r) in results {
        match r {
            Some(r) => {
                per_category.insert(c, r);
            }
            None => skipped_categories.push(c),
        }
    }

    let n = per_category.len().max(1) as f64;
    let mean = |f: &dyn Fn(&CategoryTracking) -> f64| per_category.values().map(f).sum::<f64>() / n;
    let sum = |f: &dyn Fn(&CategoryTracking) -> usize| per_category.values().map(f).sum::<usize>();
    let achieved: Vec<f64> = per_category
        .values()
        .filter_map(|c| c.amotp_achieved_only)
        .collect();
    Ok(TrackingMetrics {
        amota: mean(&|c| c.amota),
        amotp: mean(&|c| c.amotp),
        amotp_achieved_only: (!achieved.is_empty())
            .then(|| achieved.iter().sum::<f64>() / achieved.len() as f64),
        mota: mean(&|c| c.best.mota),
        motp: mean(&|c| c.best.motp),
        faf: mean(&|c| c.best.faf),
        tid: mean(&|c| c.best.tid),
        lgd: mean(&|c| c.best.lgd),
        mt: sum(&|c| c.best.mt),
        ml: sum(&|c| c.best.ml),
        fp: sum(&|c| c.best.fp),
        fn_: sum(&|c| c.best.fn_),
        ids: sum(&|c| c.best.ids),
        frag: sum(&|c| c.best.frag),
        per_category,
        skipped_categories,
    })
}

#[cfg(test)]
mod tests;
