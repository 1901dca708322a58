use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A category identifier that is not part of the general taxonomy.
    #[error("unknown category `{0}`")]
    Taxonomy(String),

    #[error(transparent)]
    Validation(#[from] ValidationError),

    /// Structural problem in an input document, located by a path such as
    /// `results["sample-12"][3].size`.
    #[error("{path}: {message}")]
    Schema { path: String, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("sweep at {sweep_time} us is later than keyframe at {keyframe_time} us")]
    TemporalOrder { sweep_time: i64, keyframe_time: i64 },

    #[error("invalid transform: {0}")]
    Transform(String),
}

impl Error {
    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// Every invariant violation found in one submission or ground-truth set.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct ValidationError {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} validation error(s)", self.violations.len())?;
        for v in &self.violations {
            write!(f, "\n  {v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Position of the offending box in the input list.
    pub index: usize,
    pub sample_id: String,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "box {} (sample `{}`): {}", self.index, self.sample_id, self.kind)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ViolationKind {
    UnknownSample,
    DuplicateTrackingId(String),
    DuplicateInstanceId(String),
    ScoreOutOfRange(f64),
    NonPositiveSize([f64; 3]),
    NonFinite(&'static str),
    WrongTask(String),
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViolationKind::UnknownSample => write!(f, "sample id not found in any scene"),
            ViolationKind::DuplicateTrackingId(id) => {
                write!(f, "tracking id `{id}` used twice in one sample")
            }
            ViolationKind::DuplicateInstanceId(id) => {
                write!(f, "instance id `{id}` used twice in one sample")
            }
            ViolationKind::ScoreOutOfRange(s) => write!(f, "score {s} outside [0, 1]"),
            ViolationKind::NonPositiveSize(s) => {
                write!(f, "size [{}, {}, {}] must be positive and finite", s[0], s[1], s[2])
            }
            ViolationKind::NonFinite(field) => write!(f, "{field} is not finite"),
            ViolationKind::WrongTask(c) => write!(f, "category `{c}` is not valid for this task"),
        }
    }
}
