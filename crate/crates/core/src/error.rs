use thiserror::Error;

/// Errors produced by geometry, operator, iteration and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid parameter `{name}` = {value}: must satisfy {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error("point {point:?} lies {distance:.3e} outside the domain")]
    DomainViolation { point: Vec<f64>, distance: f64 },

    #[error("not a self-map: image {image:?} of {point:?} leaves the domain by {distance:.3e}")]
    NotSelfMap {
        point: Vec<f64>,
        image: Vec<f64>,
        distance: f64,
    },

    #[error("degenerate domain: no usable sample pairs")]
    DegenerateDomain,

    #[error("empty trajectory")]
    EmptyTrajectory,

    #[error("trajectory too short: need at least {needed} points, got {actual}")]
    TrajectoryTooShort { needed: usize, actual: usize },

    #[error("not a fixed point: residual {residual:.3e} exceeds {tolerance:.3e}")]
    NotAFixedPoint { residual: f64, tolerance: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
