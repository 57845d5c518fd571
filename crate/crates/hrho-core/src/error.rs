//! Error types shared by all modules.

use thiserror::Error;

/// Errors produced by grid construction, the solver and the diagnostics.
#[derive(Debug, Clone, Error)]
pub enum FlowError {
    #[error("non-finite value at node {node:?}")]
    NonFinite { node: [usize; 2] },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mean convexity lost at node {node:?} (H = {mean_curv:.6e}) at t = {time:.6e}")]
    ConvexityLost {
        node: [usize; 2],
        mean_curv: f64,
        time: f64,
    },

    #[error("time step underflow (dt = {dt:.3e}) at t = {time:.6e}")]
    StiffnessFailure { dt: f64, time: f64 },

    #[error("fixed step dt = {dt:.3e} exceeds the parabolic bound {limit:.3e} at t = {time:.6e}")]
    CflExceeded { dt: f64, limit: f64, time: f64 },

    #[error("sphere has vanished: t = {time:.6e} is past the extinction time {extinction:.6e}")]
    SphereExtinct { time: f64, extinction: f64 },

    #[error("grid footprint (max horizontal distance {required:.6e}) exceeds the cap projection (radius {available:.6e})")]
    GridExceedsCap { required: f64, available: f64 },

    #[error("r_eps too small for this horizon: no sign change on the root bracket")]
    BarrierBracket,

    #[error("unknown scenario '{0}'")]
    UnknownScenario(String),

    #[error("direction not attained: nearest |nu - p| = {best:.3e} exceeds the limit {limit:.3e}")]
    DirectionNotAttained { best: f64, limit: f64 },

    #[error("coordinate patch invalid at t = {time:.6e}: {reason}")]
    PatchInvalid { time: f64, reason: String },
}

pub type Result<T> = std::result::Result<T, FlowError>;
