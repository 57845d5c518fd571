//! Localized second-order monitor.
//!
//! In a rotated coordinate frame whose upward axis is `up`, the region
//! below the hyperplane at `level` plays the role of the lower piece of the
//! surface.  The monitored quantities are
//!   stationary:     (-z)^rho F e^{beta v rho}
//!   time-weighted:  t^rho (-z)^rho F e^{beta v rho}
//! where z is the frame height of the graph point (z <= 0 on the patch),
//! v the frame gradient function 1/(-<nu, up>), and F = H^rho.  The
//! time-weighted series must stay within 3x its maximum over the first
//! quarter of the time window.

use crate::error::{FlowError, Result};
use crate::exact::SphereSolution;
use crate::geometry::{geometry_fields, pow_rho};
use crate::grid::{dot3, GridFunction, GridSpec};
use crate::solver::Trajectory;

/// Rotated frame (up direction + hyperplane level) with a gradient bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchSpec {
    /// Unit upward axis of the frame in R^{n+1}.
    pub up: [f64; 3],
    /// Frame height of the cutting hyperplane: the patch is
    /// { X : <X, up> - level <= 0 }.
    pub level: f64,
    /// Max admissible frame gradient G.
    pub gradient_bound: f64,
}

impl PatchSpec {
    /// Axis-aligned frame: up = e_{n+1}, patch = { u <= level }.
    pub fn axis_aligned(level: f64, gradient_bound: f64) -> Self {
        Self {
            up: [0.0, 0.0, 1.0],
            level,
            gradient_bound,
        }
    }

    /// Frame whose hyperplane is the tangent plane at the seed node shifted
    /// by `height_offset` along the inward normal, so the patch is a lens of
    /// depth `height_offset` around the seed.
    pub fn from_seed(
        u: &GridFunction,
        seed: [usize; 2],
        height_offset: f64,
        gradient_bound: f64,
    ) -> Result<Self> {
        if !(height_offset > 0.0) {
            return Err(FlowError::InvalidParameter(
                "patch height offset must be positive".into(),
            ));
        }
        let fields = geometry_fields(u, 1.0)?;
        let id = u.spec.index(seed[0], seed[1]);
        let nu = fields.nu[id];
        let up = [-nu[0], -nu[1], -nu[2]];
        let p = u.graph_point(seed);
        Ok(Self {
            up,
            level: dot3(p, up) + height_offset,
            gradient_bound,
        })
    }

    /// Frame height of a graph point (negative inside the patch).
    pub fn frame_height(&self, point: [f64; 3]) -> f64 {
        dot3(point, self.up) - self.level
    }
}

/// Time series of the localized monitor over a trajectory.
#[derive(Debug, Clone)]
pub struct C2Monitor {
    pub beta: f64,
    pub rho: f64,
    pub patch: PatchSpec,
    pub times: Vec<f64>,
    /// Patch max of (-z)^rho F e^{beta v rho} per snapshot.
    pub stationary: Vec<f64>,
    /// t^rho times the stationary series.
    pub time_weighted: Vec<f64>,
    pub first_quarter_max: f64,
    pub overall_max: f64,
    /// Time-weighted series stayed within 3x its first-quarter maximum.
    pub bounded: bool,
}

impl C2Monitor {
    pub fn to_csv(&self) -> String {
        use crate::csvfmt::push_f64;
        let mut out = String::from("t,stationary,time_weighted\n");
        for i in 0..self.times.len() {
            push_f64(&mut out, self.times[i]);
            out.push(',');
            push_f64(&mut out, self.stationary[i]);
            out.push(',');
            push_f64(&mut out, self.time_weighted[i]);
            out.push('\n');
        }
        out
    }
}

/// Evaluates the monitor on every snapshot.  Fails with `PatchInvalid` when
/// a patch point violates the frame gradient bound, loses graphhood in the
/// frame, or loses mean convexity.
pub fn c2_monitor(traj: &Trajectory, beta: f64, patch: PatchSpec) -> Result<C2Monitor> {
    if !(beta > 1.0) {
        return Err(FlowError::InvalidParameter(format!(
            "beta must be > 1, got {beta}"
        )));
    }
    let norm = dot3(patch.up, patch.up).sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(FlowError::InvalidParameter(
            "patch up-axis must be a unit vector".into(),
        ));
    }
    let rho = traj.params.rho;
    let t_end = traj.final_state().time;
    let quarter = traj.initial().time + 0.25 * (t_end - traj.initial().time);
    if t_end > traj.initial().time
        && !traj
            .snapshots
            .iter()
            .any(|s| s.time > traj.initial().time && s.time <= quarter)
    {
        return Err(FlowError::InvalidParameter(
            "no positive-time snapshot inside the first quarter of the window".into(),
        ));
    }

    let mut times = Vec::with_capacity(traj.snapshots.len());
    let mut stationary = Vec::with_capacity(traj.snapshots.len());
    let mut time_weighted = Vec::with_capacity(traj.snapshots.len());
    for snap in &traj.snapshots {
        let fields = geometry_fields(snap, rho)?;
        let spec = snap.spec;
        let mut patch_max: f64 = 0.0;
        for iy in 0..spec.nodes_axis1() {
            for ix in 0..spec.nodes_per_axis() {
                let id = spec.index(ix, iy);
                let z = patch.frame_height(snap.graph_point([ix, iy]));
                if z > 0.0 {
                    continue;
                }
                let nu_up = dot3(fields.nu[id], patch.up);
                if nu_up >= -1e-12 {
                    return Err(FlowError::PatchInvalid {
                        time: snap.time,
                        reason: format!("graphhood lost in the frame at node [{ix}, {iy}]"),
                    });
                }
                let v_frame = -1.0 / nu_up;
                let grad_frame = (v_frame * v_frame - 1.0).max(0.0).sqrt();
                if grad_frame > patch.gradient_bound {
                    return Err(FlowError::PatchInvalid {
                        time: snap.time,
                        reason: format!(
                            "frame gradient {grad_frame:.4} exceeds bound {} at node [{ix}, {iy}]",
                            patch.gradient_bound
                        ),
                    });
                }
                if !fields.mean_convex[id] {
                    return Err(FlowError::PatchInvalid {
                        time: snap.time,
                        reason: format!("mean convexity lost at node [{ix}, {iy}]"),
                    });
                }
                let value =
                    pow_rho(-z, rho) * fields.speed[id] * (beta * v_frame * rho).exp();
                patch_max = patch_max.max(value);
            }
        }
        times.push(snap.time);
        stationary.push(patch_max);
        time_weighted.push(pow_rho(snap.time, rho) * patch_max);
    }

    let first_quarter_max = times
        .iter()
        .zip(&time_weighted)
        .filter(|(t, _)| **t <= quarter)
        .map(|(_, v)| *v)
        .fold(0.0, f64::max);
    let overall_max = time_weighted.iter().cloned().fold(0.0, f64::max);
    let bounded = overall_max <= 3.0 * first_quarter_max;
    Ok(C2Monitor {
        beta,
        rho,
        patch,
        times,
        stationary,
        time_weighted,
        first_quarter_max,
        overall_max,
        bounded,
    })
}

/// Continuum value of the time-weighted monitor on an exact cap over the
/// grid footprint, for an axis-aligned patch.  The radial profile
/// phi(s) = (level - u(s))^rho F e^{beta W(s) rho} is maximized over the
/// attainable radii by dense scanning.
pub fn cap_monitor_closed_form(
    sphere: &SphereSolution,
    spec: &GridSpec,
    patch: &PatchSpec,
    beta: f64,
    t: f64,
) -> Result<f64> {
    if patch.up != [0.0, 0.0, 1.0] {
        return Err(FlowError::InvalidParameter(
            "closed form requires the axis-aligned patch".into(),
        ));
    }
    let rho = sphere.rho;
    let r = sphere.radius(t)?;
    let f = sphere.speed(t)?;
    let s_max = if spec.dim() == 2 {
        (2.0_f64).sqrt() * spec.half_width()
    } else {
        spec.half_width()
    };
    if s_max >= r {
        return Err(FlowError::GridExceedsCap {
            required: s_max,
            available: r,
        });
    }
    let phi = |s: f64| -> f64 {
        let height = sphere.center[2] - (r * r - s * s).sqrt();
        let z = height - patch.level;
        if z > 0.0 {
            return 0.0;
        }
        let w = r / (r * r - s * s).sqrt();
        pow_rho(-z, rho) * f * (beta * w * rho).exp()
    };
    let samples = 20_000;
    let mut best: f64 = 0.0;
    for i in 0..=samples {
        best = best.max(phi(s_max * i as f64 / samples as f64));
    }
    Ok(pow_rho(t, rho) * best)
}
