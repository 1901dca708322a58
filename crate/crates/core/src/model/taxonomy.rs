//! Class taxonomy: the 23 general annotation classes and their projection onto
//! the 10 detection and 7 tracking classes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One of the ten classes scored by the detection task. The tracking task
/// uses the seven non-static ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionClass {
    Barrier,
    Bicycle,
    Bus,
    Car,
    ConstructionVehicle,
    Motorcycle,
    Pedestrian,
    TrafficCone,
    Trailer,
    Truck,
}

impl DetectionClass {
    pub const ALL: [DetectionClass; 10] = [
        DetectionClass::Barrier,
        DetectionClass::Bicycle,
        DetectionClass::Bus,
        DetectionClass::Car,
        DetectionClass::ConstructionVehicle,
        DetectionClass::Motorcycle,
        DetectionClass::Pedestrian,
        DetectionClass::TrafficCone,
        DetectionClass::Trailer,
        DetectionClass::Truck,
    ];

    pub const TRACKING: [DetectionClass; 7] = [
        DetectionClass::Bicycle,
        DetectionClass::Bus,
        DetectionClass::Car,
        DetectionClass::Motorcycle,
        DetectionClass::Pedestrian,
        DetectionClass::Trailer,
        DetectionClass::Truck,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DetectionClass::Barrier => "barrier",
            DetectionClass::Bicycle => "bicycle",
            DetectionClass::Bus => "bus",
            DetectionClass::Car => "car",
            DetectionClass::ConstructionVehicle => "construction_vehicle",
            DetectionClass::Motorcycle => "motorcycle",
            DetectionClass::Pedestrian => "pedestrian",
            DetectionClass::TrafficCone => "traffic_cone",
            DetectionClass::Trailer => "trailer",
            DetectionClass::Truck => "truck",
        }
    }

    /// Static classes (barrier, construction vehicle, traffic cone) are not tracked.
    pub fn is_tracking(self) -> bool {
        !matches!(
            self,
            DetectionClass::Barrier
                | DetectionClass::ConstructionVehicle
                | DetectionClass::TrafficCone
        )
    }

    /// Representative full-taxonomy name, used when writing annotation files.
    pub fn canonical_general_name(self) -> &'static str {
        match self {
            DetectionClass::Barrier => "movable_object.barrier",
            DetectionClass::Bicycle => "vehicle.bicycle",
            DetectionClass::Bus => "vehicle.bus.rigid",
            DetectionClass::Car => "vehicle.car",
            DetectionClass::ConstructionVehicle => "vehicle.construction",
            DetectionClass::Motorcycle => "vehicle.motorcycle",
            DetectionClass::Pedestrian => "human.pedestrian.adult",
            DetectionClass::TrafficCone => "movable_object.trafficcone",
            DetectionClass::Trailer => "vehicle.trailer",
            DetectionClass::Truck => "vehicle.truck",
        }
    }
}

impl fmt::Display for DetectionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DetectionClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DetectionClass::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Taxonomy(s.to_string()))
    }
}

/// A row of the class mapping table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Category {
    pub general_name: &'static str,
    pub detection: Option<DetectionClass>,
    pub tracking: Option<DetectionClass>,
}

use DetectionClass as D;

const GENERAL_CLASSES: [(&str, Option<DetectionClass>); 23] = [
    ("animal", None),
    ("debris", None),
    ("pushable_pullable", None),
    ("bicycle_rack", None),
    ("ambulance", None),
    ("police", None),
    ("barrier", Some(D::Barrier)),
    ("bicycle", Some(D::Bicycle)),
    ("bus.bendy", Some(D::Bus)),
    ("bus.rigid", Some(D::Bus)),
    ("car", Some(D::Car)),
    ("construction", Some(D::ConstructionVehicle)),
    ("motorcycle", Some(D::Motorcycle)),
    ("adult", Some(D::Pedestrian)),
    ("child", Some(D::Pedestrian)),
    ("construction_worker", Some(D::Pedestrian)),
    ("police_officer", Some(D::Pedestrian)),
    ("personal_mobility", None),
    ("stroller", None),
    ("wheelchair", None),
    ("trafficcone", Some(D::TrafficCone)),
    ("trailer", Some(D::Trailer)),
    ("truck", Some(D::Truck)),
];

// Longest first so `vehicle.emergency.` wins over `vehicle.`.
const PREFIXES: [&str; 6] = [
    "vehicle.emergency.",
    "human.pedestrian.",
    "movable_object.",
    "static_object.",
    "vehicle.",
    "human.",
];

/// General name of the bike-rack class, whose boxes act as ignore regions.
pub const IGNORE_REGION_CLASS: &str = "bicycle_rack";

/// Strips a known taxonomy prefix, e.g. `vehicle.bus.rigid` -> `bus.rigid`.
pub fn strip_prefix(name: &str) -> &str {
    PREFIXES
        .iter()
        .find_map(|p| name.strip_prefix(p))
        .unwrap_or(name)
}

/// Maps a general class name (with or without its taxonomy prefix) onto the
/// detection and tracking classes.
pub fn map_category(general_name: &str) -> Result<Category> {
    let short = strip_prefix(general_name);
    let (general_name, detection) = GENERAL_CLASSES
        .iter()
        .find(|(g, _)| *g == short)
        .copied()
        .ok_or_else(|| Error::Taxonomy(general_name.to_string()))?;
    Ok(Category {
        general_name,
        detection,
        tracking: detection.filter(|d| d.is_tracking()),
    })
}

/// All 23 short general names, in table order.
pub fn general_names() -> impl Iterator<Item = &'static str> {
    GENERAL_CLASSES.iter().map(|(g, _)| *g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_rows() {
        let car = map_category("car").unwrap();
        assert_eq!(car.general_name, "car");
        assert_eq!(car.detection, Some(D::Car));
        assert_eq!(car.tracking, Some(D::Car));

        let cv = map_category("construction").unwrap();
        assert_eq!(cv.detection, Some(D::ConstructionVehicle));
        assert_eq!(cv.tracking, None);

        let debris = map_category("debris").unwrap();
        assert_eq!((debris.detection, debris.tracking), (None, None));
    }

    #[test]
    fn prefixed_names() {
        assert_eq!(map_category("vehicle.bus.bendy").unwrap().detection, Some(D::Bus));
        assert_eq!(
            map_category("human.pedestrian.police_officer").unwrap().tracking,
            Some(D::Pedestrian)
        );
        assert_eq!(map_category("vehicle.emergency.police").unwrap().detection, None);
        assert_eq!(
            map_category("movable_object.trafficcone").unwrap().detection,
            Some(D::TrafficCone)
        );
        assert_eq!(map_category("static_object.bicycle_rack").unwrap().general_name, "bicycle_rack");
    }

    #[test]
    fn unknown_name_is_reported() {
        match map_category("vehicle.hovercraft") {
            Err(Error::Taxonomy(name)) => assert_eq!(name, "vehicle.hovercraft"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn mapping_is_total_and_consistent() {
        let names: Vec<_> = general_names().collect();
        assert_eq!(names.len(), 23);
        let mut detection_classes = std::collections::BTreeSet::new();
        let mut tracking_classes = std::collections::BTreeSet::new();
        for name in names {
            let cat = map_category(name).unwrap();
            // tracking non-void only when detection non-void
            if cat.tracking.is_some() {
                assert!(cat.detection.is_some());
            }
            detection_classes.extend(cat.detection);
            tracking_classes.extend(cat.tracking);
            // idempotent on the projection
            if let Some(d) = cat.detection {
                let again = map_category(strip_prefix(d.canonical_general_name())).unwrap();
                assert_eq!(again.detection, Some(d));
                assert_eq!(again.tracking, cat.tracking);
            }
        }
        assert_eq!(detection_classes.len(), 10);
        assert_eq!(tracking_classes.len(), 7);
        for s in [D::Barrier, D::ConstructionVehicle, D::TrafficCone] {
            assert!(!tracking_classes.contains(&s));
        }
    }

    #[test]
    fn detection_class_string_round_trip() {
        for c in DetectionClass::ALL {
            assert_eq!(c.as_str().parse::<DetectionClass>().unwrap(), c);
        }
    }
}
