use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::taxonomy::DetectionClass;
use crate::error::{Error, Result};

/// The five true-positive error metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TpMetric {
    Ate,
    Ase,
    Aoe,
    Ave,
    Aae,
}

impl TpMetric {
    pub const ALL: [TpMetric; 5] = [
        TpMetric::Ate,
        TpMetric::Ase,
        TpMetric::Aoe,
        TpMetric::Ave,
        TpMetric::Aae,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            TpMetric::Ate => "ATE",
            TpMetric::Ase => "ASE",
            TpMetric::Aoe => "AOE",
            TpMetric::Ave => "AVE",
            TpMetric::Aae => "AAE",
        }
    }
}

impl fmt::Display for TpMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Evaluation parameters. Every field has a default, so a config file only
/// needs the fields it overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// Center-distance matching thresholds for AP, meters.
    pub distance_thresholds: Vec<f64>,
    /// Matching threshold for TP metrics and tracking, meters.
    pub tp_distance: f64,
    pub min_recall: f64,
    pub min_precision: f64,
    /// Maximum ego-relative ground-plane range per class, meters.
    pub per_category_max_range: BTreeMap<DetectionClass, f64>,
    pub require_sensor_points: bool,
    pub recall_samples: usize,
    pub tracking_recall_points: usize,
    /// Classes to evaluate.
    pub categories: Vec<DetectionClass>,
    /// Maximum distance from the positive region of a map mask, meters.
    pub map_max_distance: f64,
    /// Per-class IOU thresholds used by IOU matching.
    pub iou_thresholds: BTreeMap<DetectionClass, f64>,
    /// TP metrics that are not defined for a class.
    pub not_applicable: BTreeMap<DetectionClass, BTreeSet<TpMetric>>,
    /// Classes whose orientation error is measured on a half-turn period.
    pub half_period_yaw: BTreeSet<DetectionClass>,
    /// Coverage ratios for mostly-tracked / mostly-lost trajectories.
    pub mostly_tracked_ratio: f64,
    pub mostly_lost_ratio: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        use DetectionClass as D;
        let per_category_max_range = DetectionClass::ALL
            .into_iter()
            .map(|c| {
                let range = match c {
                    D::Car | D::Truck | D::Bus | D::Trailer | D::ConstructionVehicle => 50.0,
                    _ => 40.0,
                };
                (c, range)
            })
            .collect();
        let iou_thresholds = DetectionClass::ALL
            .into_iter()
            .map(|c| {
                let t = match c {
                    D::Car | D::Truck | D::Bus | D::Trailer | D::ConstructionVehicle => 0.7,
                    _ => 0.5,
                };
                (c, t)
            })
            .collect();
        let not_applicable = [
            (D::TrafficCone, vec![TpMetric::Aoe, TpMetric::Ave, TpMetric::Aae]),
            (D::Barrier, vec![TpMetric::Ave, TpMetric::Aae]),
        ]
        .into_iter()
        .map(|(c, m)| (c, m.into_iter().collect()))
        .collect();
        EvalConfig {
            distance_thresholds: vec![0.5, 1.0, 2.0, 4.0],
            tp_distance: 2.0,
            min_recall: 0.1,
            min_precision: 0.1,
            per_category_max_range,
            require_sensor_points: true,
            recall_samples: 101,
            tracking_recall_points: 40,
            categories: DetectionClass::ALL.to_vec(),
            map_max_distance: 0.0,
            iou_thresholds,
            not_applicable,
            half_period_yaw: [D::Barrier].into_iter().collect(),
            mostly_tracked_ratio: 0.8,
            mostly_lost_ratio: 0.2,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.distance_thresholds.is_empty() {
            return bad("distance_thresholds is empty".into());
        }
        if self
            .distance_thresholds
            .iter()
            .any(|d| !(d.is_finite() && *d > 0.0))
        {
            return bad("distance thresholds must be positive".into());
        }
        if !self.distance_thresholds.contains(&self.tp_distance) {
            return bad(format!(
                "tp_distance {} is not one of the distance thresholds",
                self.tp_distance
            ));
        }
        for (name, v) in [("min_recall", self.min_recall), ("min_precision", self.min_precision)] {
            if !(v > 0.0 && v < 1.0) {
                return bad(format!("{name} must lie strictly between 0 and 1, got {v}"));
            }
        }
        if self.recall_samples < 2 {
            return bad("recall_samples must be at least 2".into());
        }
        if self.tracking_recall_points == 0 {
            return bad("tracking_recall_points must be positive".into());
        }
        if self.categories.is_empty() {
            return bad("category set is empty".into());
        }
        if self.map_max_distance < 0.0 || !self.map_max_distance.is_finite() {
            return bad("map_max_distance must be non-negative".into());
        }
        for (c, t) in &self.iou_thresholds {
            if !(*t > 0.0 && *t <= 1.0) {
                return bad(format!("IOU threshold for {c} must lie in (0, 1]"));
            }
        }
        if !(0.0..=1.0).contains(&self.mostly_lost_ratio)
            || !(0.0..=1.0).contains(&self.mostly_tracked_ratio)
            || self.mostly_lost_ratio >= self.mostly_tracked_ratio
        {
            return bad("coverage ratios must satisfy 0 <= lost < tracked <= 1".into());
        }
        Ok(())
    }

    pub fn max_range(&self, category: DetectionClass) -> f64 {
        self.per_category_max_range
            .get(&category)
            .copied()
            .unwrap_or(f64::INFINITY)
    }

    pub fn is_applicable(&self, category: DetectionClass, metric: TpMetric) -> bool {
        !self
            .not_applicable
            .get(&category)
            .is_some_and(|s| s.contains(&metric))
    }

    pub fn iou_threshold(&self, category: DetectionClass) -> f64 {
        self.iou_thresholds.get(&category).copied().unwrap_or(0.5)
    }

    pub fn tracking_categories(&self) -> Vec<DetectionClass> {
        self.categories
            .iter()
            .copied()
            .filter(|c| c.is_tracking())
            .collect()
    }
}
