//! Confidence-ordered greedy matching of predictions to ground truth, and the
//! recall-grid curves built from the matches.
//!
//! Predictions are visited in descending score; equal scores keep their input
//! order. Each prediction takes the best still-unmatched ground-truth box that
//! satisfies the match predicate: the nearest one for center distance, the
//! highest-overlap one for IOU. This is greedy, not an optimal assignment.

mod curve;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use curve::{
    grid_index_above, pr_curve, recall_grid, tp_error_curves, PrCurve, TpErrorCurves,
};

use crate::error::{Error, Result};
use crate::geometry::{bev_iou, center_distance_2d, iou_3d};
use crate::model::{AsBox, Scored, TpMetric};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MatchKind {
    #[serde(rename = "cd")]
    CenterDistance,
    #[serde(rename = "iou_bev")]
    IouBev,
    #[serde(rename = "iou_3d")]
    Iou3d,
}

impl MatchKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MatchKind::CenterDistance => "cd",
            MatchKind::IouBev => "iou_bev",
            MatchKind::Iou3d => "iou_3d",
        }
    }
}

impl fmt::Display for MatchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for MatchKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cd" => Ok(MatchKind::CenterDistance),
            "iou_bev" => Ok(MatchKind::IouBev),
            "iou_3d" => Ok(MatchKind::Iou3d),
            other => Err(Error::Config(format!("unknown matcher `{other}`"))),
        }
    }
}

/// Match predicate: center distance strictly below `threshold` meters, or
/// IOU at least `threshold`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchMetric {
    kind: MatchKind,
    threshold: f64,
}

impl MatchMetric {
    pub fn new(kind: MatchKind, threshold: f64) -> Result<Self> {
        if !(threshold.is_finite() && threshold > 0.0) {
            return Err(Error::Config(format!("match threshold {threshold} must be positive")));
        }
        if kind != MatchKind::CenterDistance && threshold > 1.0 {
            return Err(Error::Config(format!("IOU threshold {threshold} exceeds 1")));
        }
        Ok(MatchMetric { kind, threshold })
    }

    pub fn center_distance(threshold: f64) -> Result<Self> {
        Self::new(MatchKind::CenterDistance, threshold)
    }

    pub fn kind(&self) -> MatchKind {
        self.kind
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }
}

/// Per-match true-positive errors, indexed by [`TpMetric`]. `None` marks a
/// metric that is not applicable to the pair.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TpErrors(pub [Option<f64>; 5]);

impl TpErrors {
    pub fn get(&self, metric: TpMetric) -> Option<f64> {
        self.0[metric.index()]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Match {
    pub pred: usize,
    pub gt: usize,
    pub score: f64,
    /// Ground-plane center distance, meters.
    pub distance: f64,
    pub iou: Option<f64>,
    /// Position in the score-ordered visit sequence of the sample.
    pub rank: usize,
    pub errors: TpErrors,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Unmatched {
    pub pred: usize,
    pub score: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MatchSet {
    /// In descending confidence.
    pub matches: Vec<Match>,
    pub false_positives: Vec<Unmatched>,
    pub false_negatives: Vec<usize>,
    pub num_gt: usize,
}

/// Indices of `preds` by descending score, stable on ties.
pub fn score_order<P: Scored>(preds: &[P]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&a, &b| preds[b].score().total_cmp(&preds[a].score()));
    order
}

/// Greedy matching within one sample and one category.
pub fn match_greedy<G: AsBox, P: Scored>(gts: &[G], preds: &[P], metric: &MatchMetric) -> MatchSet {
    let mut taken = vec![false; gts.len()];
    let mut set = MatchSet {
        num_gt: gts.len(),
        ..Default::default()
    };
    for (rank, pi) in score_order(preds).into_iter().enumerate() {
        let pred = preds[pi].record();
        // (gt index, distance, iou)
        let mut best: Option<(usize, f64, Option<f64>)> = None;
        for (gi, gt) in gts.iter().enumerate() {
            if taken[gi] {
                continue;
            }
            let gt = gt.record();
            let distance = center_distance_2d(gt, pred);
            match metric.kind {
                MatchKind::CenterDistance => {
                    if distance < metric.threshold && best.is_none_or(|(_, d, _)| distance < d) {
                        best = Some((gi, distance, None));
                    }
                }
                MatchKind::IouBev | MatchKind::Iou3d => {
                    let iou = if metric.kind == MatchKind::IouBev {
                        bev_iou(gt, pred)
                    } else {
                        iou_3d(gt, pred)
                    };
                    if iou >= metric.threshold
                        && best.is_none_or(|(_, _, b)| iou > b.unwrap_or(0.0))
                    {
                        best = Some((gi, distance, Some(iou)));
                    }
                }
            }
        }
        let score = preds[pi].score();
        match best {
            Some((gi, distance, iou)) => {
                taken[gi] = true;
                set.matches.push(Match {
                    pred: pi,
                    gt: gi,
                    score,
                    distance,
                    iou,
                    rank,
                    errors: TpErrors::default(),
                });
            }
            None => set.false_positives.push(Unmatched {
                pred: pi,
                score,
                rank,
            }),
        }
    }
    set.false_negatives = (0..gts.len()).filter(|&g| !taken[g]).collect();
    set
}
