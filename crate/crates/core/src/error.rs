use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate realization: {0}")]
    DegenerateRealization(String),

    #[error("bearing is not a unit vector (norm {0})")]
    InvalidBearing(f64),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported size: {0}")]
    UnsupportedSize(String),

    #[error("unsupported dimension {0} (yaw-only camera model needs d in {{2, 3}})")]
    UnsupportedDimension(usize),

    #[error("graph is disconnected")]
    DisconnectedGraph,

    #[error("no weight for edge {{{0}, {1}}}")]
    MissingWeight(usize, usize),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("framework is not localizable from the given anchors: {0}")]
    NotLocalizable(String),

    #[error("shared vertex {0} has inconsistent positions")]
    InconsistentRealization(usize),

    #[error("inter-robot distance {distance} between {i} and {j} is at or below the minimum {min}")]
    CollisionViolation {
        i: usize,
        j: usize,
        distance: f64,
        min: f64,
    },

    #[error("rigidity eigenvalue {eigenvalue} of subframework {center} is at or below the floor {floor}")]
    RigidityFloorBreached {
        center: usize,
        eigenvalue: f64,
        floor: f64,
    },

    #[error("center {center} is missing the state of member {member}")]
    StaleDecomposition { center: usize, member: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
