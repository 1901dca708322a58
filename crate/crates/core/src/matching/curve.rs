use super::MatchSet;
use crate::model::TpMetric;

/// `n` evenly spaced recall values on [0, 1], endpoints included.
pub fn recall_grid(n: usize) -> Vec<f64> {
    assert!(n >= 2, "a recall grid needs at least two points");
    (0..n).map(|k| k as f64 / (n - 1) as f64).collect()
}

/// First grid index whose recall is strictly above `level`.
pub fn grid_index_above(level: f64, n: usize) -> usize {
    let scaled = level * (n - 1) as f64;
    // snap values like 0.1 * 100 = 10.000000000000002 onto the grid
    let rounded = scaled.round();
    if (scaled - rounded).abs() < 1e-9 {
        rounded as usize + 1
    } else {
        scaled.ceil() as usize
    }
}

/// Interpolated precision and confidence on the recall grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PrCurve {
    pub recall: Vec<f64>,
    pub precision: Vec<f64>,
    pub confidence: Vec<f64>,
    /// Highest recall reached by any operating point.
    pub max_recall: f64,
    pub num_gt: usize,
}

/// (score, is_tp) for every prediction, pooled over samples in descending
/// score. Ties keep sample order, then visit order inside the sample.
fn pooled_decisions(per_sample: &[MatchSet]) -> Vec<(f64, bool)> {
    let mut pooled = Vec::new();
    for set in per_sample {
        let mut local: Vec<(usize, f64, bool)> = set
            .matches
            .iter()
            .map(|m| (m.rank, m.score, true))
            .chain(set.false_positives.iter().map(|f| (f.rank, f.score, false)))
            .collect();
        local.sort_by_key(|d| d.0);
        pooled.extend(local.into_iter().map(|(_, s, tp)| (s, tp)));
    }
    pooled.sort_by(|a, b| b.0.total_cmp(&a.0));
    pooled
}

/// Pools all matches of one category and threshold into a PR curve sampled
/// on an `n`-point recall grid. Each grid point takes the precision of the
/// first operating point whose recall reaches it; points beyond the highest
/// recall get precision and confidence 0. Returns `None` when there is no
/// ground truth.
pub fn pr_curve(per_sample: &[MatchSet], n: usize) -> Option<PrCurve> {
    let num_gt: usize = per_sample.iter().map(|s| s.num_gt).sum();
    if num_gt == 0 {
        return None;
    }
    let recall = recall_grid(n);
    let mut ops: Vec<(f64, f64, f64)> = Vec::new(); // (recall, precision, score)
    let (mut tp, mut fp) = (0usize, 0usize);
    for (score, is_tp) in pooled_decisions(per_sample) {
        if is_tp {
            tp += 1;
        } else {
            fp += 1;
        }
        ops.push((tp as f64 / num_gt as f64, tp as f64 / (tp + fp) as f64, score));
    }
    let max_recall = ops.last().map_or(0.0, |o| o.0);

    let mut precision = vec![0.0; n];
    let mut confidence = vec![0.0; n];
    let mut i = 0;
    for (k, &r) in recall.iter().enumerate() {
        while i < ops.len() && ops[i].0 < r {
            i += 1;
        }
        if i == ops.len() {
            break;
        }
        precision[k] = ops[i].1;
        confidence[k] = ops[i].2;
    }
    Some(PrCurve {
        recall,
        precision,
        confidence,
        max_recall,
        num_gt,
    })
}

/// Running mean of each TP error over matches in descending confidence,
/// sampled on the recall grid. `None` marks grid points above the highest
/// recall, or points where the metric has no defined value yet.
#[derive(Debug, Clone, PartialEq)]
pub struct TpErrorCurves {
    pub recall: Vec<f64>,
    pub series: [Vec<Option<f64>>; 5],
    pub max_recall: f64,
}

impl TpErrorCurves {
    pub fn series(&self, metric: TpMetric) -> &[Option<f64>] {
        &self.series[metric.index()]
    }
}

pub fn tp_error_curves(per_sample: &[MatchSet], n: usize) -> TpErrorCurves {
    let num_gt: usize = per_sample.iter().map(|s| s.num_gt).sum();
    let mut matches: Vec<(usize, usize, f64)> = per_sample
        .iter()
        .enumerate()
        .flat_map(|(si, s)| s.matches.iter().enumerate().map(move |(mi, m)| (si, mi, m.score)))
        .collect();
    matches.sort_by(|a, b| b.2.total_cmp(&a.2));

    let recall = recall_grid(n);
    let max_recall = if num_gt == 0 {
        0.0
    } else {
        matches.len() as f64 / num_gt as f64
    };

    // cumulative means after each match
    let mut sums = [0.0f64; 5];
    let mut counts = [0usize; 5];
    let mut running: Vec<[Option<f64>; 5]> = Vec::with_capacity(matches.len());
    for &(si, mi, _) in &matches {
        let errors = per_sample[si].matches[mi].errors;
        let mut row = [None; 5];
        for m in TpMetric::ALL {
            let k = m.index();
            if let Some(e) = errors.0[k] {
                sums[k] += e;
                counts[k] += 1;
            }
            if counts[k] > 0 {
                row[k] = Some(sums[k] / counts[k] as f64);
            }
        }
        running.push(row);
    }

    let mut series: [Vec<Option<f64>>; 5] = Default::default();
    for s in &mut series {
        s.resize(n, None);
    }
    let mut j = 0;
    for (k, &r) in recall.iter().enumerate() {
        // first match whose recall (j + 1) / num_gt reaches r
        while j < running.len() && ((j + 1) as f64 / num_gt as f64) < r {
            j += 1;
        }
        if j == running.len() {
            break;
        }
        for m in 0..5 {
            series[m][k] = running[j][m];
        }
    }
    TpErrorCurves {
        recall,
        series,
        max_recall,
    }
}
