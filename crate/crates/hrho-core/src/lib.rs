//! Numerical laboratory for convex entire graphs moving with normal velocity
//! H^rho, rho > 0: the graphical flow solver, exact shrinking-sphere
//! solutions and barriers, and the diagnostics that verify the monitored
//! identities and inequalities at desk scale.

pub mod csvfmt;
pub mod diagnostics;
pub mod error;
pub mod exact;
pub mod geometry;
pub mod grid;
pub mod solver;

pub use error::{FlowError, Result};
pub use exact::{solve_barrier, solve_barrier_with_coefficient, BarrierSpec, Scenario, SphereSolution};
pub use geometry::{
    derivatives, divergence_form_speed, geometry_fields, tangent_plane_distance, Derivatives,
    GeometryFields, MEAN_CONVEXITY_FLOOR,
};
pub use grid::{GridFunction, GridSpec};
pub use solver::{
    barrier_ordering, comparison_run, nested_domain_study, run, scaling_symmetry_deviation, step,
    BarrierOrderingReport, BoundaryPolicy, FlowParams, NestedDomainReport, OrderingReport,
    StepRecord, TimeStepPolicy, Trajectory,
};
