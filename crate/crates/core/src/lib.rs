//! Evaluation engine for 3D object detection and multi-object tracking.
//!
//! Detection is scored with center-distance average precision, five
//! true-positive error metrics and their weighted blend (NDS). Tracking is
//! scored with recall-normalized MOTA averaged over a recall sweep (AMOTA),
//! its precision counterpart (AMOTP), CLEAR-MOT counts at the best operating
//! point, and track initialization / longest gap durations.

pub mod detection;
pub mod error;
pub mod geometry;
pub mod io;
pub mod matching;
pub mod model;
pub mod pipeline;
pub mod report;
pub mod synth;
pub mod tracking;

pub use error::{Error, Result};
