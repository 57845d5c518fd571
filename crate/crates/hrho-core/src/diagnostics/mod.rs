//! Numerical verification of the monitored inequalities and identities:
//! normal-oscillation profiles, the localized second-order monitor, the
//! evolution-equation identities on exact spheres, dual-function concavity,
//! the Harnack inequality, lower velocity bounds and normal-image
//! disjointness.
//!
//! Every diagnostic is a pure function of an immutable trajectory (or of
//! closed-form data); running one leaves the trajectory untouched.

mod c2;
mod dual;
mod harnack;
mod identities;
mod normal_image;
mod nu;

pub use c2::{c2_monitor, cap_monitor_closed_form, C2Monitor, PatchSpec};
pub use dual::{
    concavity_matrix, dual_concavity_check, dual_hessian, dual_value, leading_minor_det,
    principal_minor, principal_minor_scale, sample_lambdas, symmetric_eigenvalues,
    DualConcavityReport,
};
pub use harnack::{
    harnack_check, locate_normal_direction, velocity_floor_check, HarnackRecord,
    VelocityFloorReport,
};
pub use identities::{evolution_identity_check, IdentityKind};
pub use normal_image::{normal_image_disjointness, DisjointnessReport};
pub use nu::{nu_preservation_check, nu_profile, NuPreservationReport, NuProfile};
