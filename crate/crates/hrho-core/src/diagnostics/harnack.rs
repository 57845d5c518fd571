//! Harnack-type speed comparison at a fixed normal direction, plus the
//! lower velocity bound that follows from it.
//!
//! For strictly convex graphs the gradient map is monotone, so a normal
//! direction is attained at a unique point up to grid resolution.  The point
//! is located by a full scan of |nu - p|^2 followed by a per-axis quadratic
//! fit, and fields are evaluated there by per-axis quadratic interpolation.

use crate::error::{FlowError, Result};
use crate::geometry::{derivatives, point_geometry, pow_rho, Derivatives};
use crate::grid::{GridFunction, GridSpec};
use crate::solver::Trajectory;

/// Sub-node location of a normal direction.
#[derive(Debug, Clone, Copy)]
pub struct LocatedPoint {
    pub node: [usize; 2],
    /// Per-axis offset in node units, in [-0.5, 0.5].
    pub offset: [f64; 2],
    /// |nu - p| at the best node.
    pub distance: f64,
}

/// Finds the grid region where nu is closest to `p`: argmin scan of
/// |nu - p|^2, then a local quadratic fit per axis.  Errors with
/// `DirectionNotAttained` when the best |nu - p| exceeds
/// 5 dx max|D^2 u|.
pub fn locate_normal_direction(
    u: &GridFunction,
    derivs: &Derivatives,
    p: [f64; 3],
) -> Result<LocatedPoint> {
    let spec = u.spec;
    let count = spec.node_count();
    let mut best_id = 0usize;
    let mut best = f64::INFINITY;
    let mut max_d2: f64 = 0.0;
    for id in 0..count {
        let du = derivs.du[id];
        let w = (1.0 + du[0] * du[0] + du[1] * du[1]).sqrt();
        let nu = [du[0] / w, du[1] / w, -1.0 / w];
        let d2 = (nu[0] - p[0]).powi(2) + (nu[1] - p[1]).powi(2) + (nu[2] - p[2]).powi(2);
        if d2 < best {
            best = d2;
            best_id = id;
        }
        for k in 0..3 {
            max_d2 = max_d2.max(derivs.d2u[id][k].abs());
        }
    }
    let distance = best.sqrt();
    let limit = 5.0 * spec.dx() * max_d2;
    if distance > limit {
        return Err(FlowError::DirectionNotAttained {
            best: distance,
            limit,
        });
    }

    let node = spec.node_of(best_id);
    let dist2_at = |n: [usize; 2]| -> f64 {
        let id = spec.index(n[0], n[1]);
        let du = derivs.du[id];
        let w = (1.0 + du[0] * du[0] + du[1] * du[1]).sqrt();
        let nu = [du[0] / w, du[1] / w, -1.0 / w];
        (nu[0] - p[0]).powi(2) + (nu[1] - p[1]).powi(2) + (nu[2] - p[2]).powi(2)
    };
    let mut offset = [0.0f64; 2];
    let axes = spec.dim();
    for axis in 0..axes {
        let i = node[axis];
        let n_axis = spec.nodes_per_axis();
        if i == 0 || i + 1 >= n_axis {
            continue; // minimum on the rim; keep the node itself
        }
        let mut lo = node;
        let mut hi = node;
        lo[axis] -= 1;
        hi[axis] += 1;
        let (dm, d0, dp) = (dist2_at(lo), dist2_at(node), dist2_at(hi));
        let denom = dm - 2.0 * d0 + dp;
        if denom > 0.0 {
            offset[axis] = (0.5 * (dm - dp) / denom).clamp(-0.5, 0.5);
        }
    }
    Ok(LocatedPoint {
        node,
        offset,
        distance,
    })
}

/// Quadratic interpolation of a nodal field at a located point.
fn interpolate_at(
    spec: &GridSpec,
    value_at: &dyn Fn([usize; 2]) -> f64,
    loc: &LocatedPoint,
) -> f64 {
    let quad = |vm: f64, v0: f64, vp: f64, d: f64| -> f64 {
        v0 + d * 0.5 * (vp - vm) + d * d * 0.5 * (vp - 2.0 * v0 + vm)
    };
    let sample_axis0 = |iy: usize| -> f64 {
        let ix = loc.node[0];
        if ix == 0 || ix + 1 >= spec.nodes_per_axis() || loc.offset[0] == 0.0 {
            value_at([ix, iy])
        } else {
            quad(
                value_at([ix - 1, iy]),
                value_at([ix, iy]),
                value_at([ix + 1, iy]),
                loc.offset[0],
            )
        }
    };
    if spec.dim() == 1 {
        sample_axis0(0)
    } else {
        let iy = loc.node[1];
        if iy == 0 || iy + 1 >= spec.nodes_per_axis() || loc.offset[1] == 0.0 {
            sample_axis0(iy)
        } else {
            quad(
                sample_axis0(iy - 1),
                sample_axis0(iy),
                sample_axis0(iy + 1),
                loc.offset[1],
            )
        }
    }
}

/// Mean curvature of a snapshot at a located point.
fn mean_curv_at(u: &GridFunction, derivs: &Derivatives, loc: &LocatedPoint) -> f64 {
    let spec = u.spec;
    let value = |n: [usize; 2]| {
        let id = spec.index(n[0], n[1]);
        point_geometry(spec.dim(), derivs.du[id], derivs.d2u[id]).mean_curv
    };
    interpolate_at(&spec, &value, loc)
}

/// One speed-ratio comparison at a fixed normal direction.
#[derive(Debug, Clone, Copy)]
pub struct HarnackRecord {
    pub direction: [f64; 3],
    /// Snapshot times actually used.
    pub t1: f64,
    pub t2: f64,
    pub speed1: f64,
    pub speed2: f64,
    /// speed2 / speed1.
    pub ratio: f64,
    /// (t1 / t2)^{rho / (rho + 1)}.
    pub bound: f64,
    /// 1 - 50 dx^2 / min(t1, 1): discretization budget calibrated on the
    /// exact sphere.
    pub tolerance_factor: f64,
    pub passed: bool,
}

impl HarnackRecord {
    pub fn to_csv(&self) -> String {
        use crate::csvfmt::push_f64;
        let mut out = String::from("p1,p2,p3,t1,t2,f1,f2,ratio,bound,tolerance_factor,passed\n");
        for (k, v) in [
            self.direction[0],
            self.direction[1],
            self.direction[2],
            self.t1,
            self.t2,
            self.speed1,
            self.speed2,
            self.ratio,
            self.bound,
            self.tolerance_factor,
        ]
        .iter()
        .enumerate()
        {
            if k > 0 {
                out.push(',');
            }
            push_f64(&mut out, *v);
        }
        out.push(',');
        out.push_str(if self.passed { "1" } else { "0" });
        out.push('\n');
        out
    }
}

/// Evaluates F at the point with normal `p` on the snapshots nearest t1 and
/// t2 and compares the ratio against the Harnack bound minus the
/// discretization tolerance.
pub fn harnack_check(
    traj: &Trajectory,
    p: [f64; 3],
    t1: f64,
    t2: f64,
) -> Result<HarnackRecord> {
    if !(t1 > 0.0 && t2 >= t1) {
        return Err(FlowError::InvalidParameter(format!(
            "need 0 < t1 <= t2, got ({t1}, {t2})"
        )));
    }
    let norm = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    if (norm - 1.0).abs() > 1e-9 || p[2] >= 0.0 {
        return Err(FlowError::InvalidParameter(
            "direction must be a unit vector in the lower hemisphere".into(),
        ));
    }
    let rho = traj.params.rho;
    let snap1 = traj.snapshot_nearest(t1);
    let snap2 = traj.snapshot_nearest(t2);
    if snap1.time <= 0.0 {
        return Err(FlowError::InvalidParameter(format!(
            "no positive-time snapshot near t1 = {t1}"
        )));
    }
    let speed_at = |snap: &GridFunction| -> Result<f64> {
        let derivs = derivatives(snap)?;
        let loc = locate_normal_direction(snap, &derivs, p)?;
        let h = mean_curv_at(snap, &derivs, &loc);
        if !(h > 0.0) {
            return Err(FlowError::ConvexityLost {
                node: loc.node,
                mean_curv: h,
                time: snap.time,
            });
        }
        Ok(pow_rho(h, rho))
    };
    let speed1 = speed_at(snap1)?;
    let speed2 = speed_at(snap2)?;
    let ratio = speed2 / speed1;
    let bound = (snap1.time / snap2.time).powf(rho / (rho + 1.0));
    let dx = traj.initial().spec.dx();
    let tolerance_factor = 1.0 - 50.0 * dx * dx / snap1.time.min(1.0);
    Ok(HarnackRecord {
        direction: p,
        t1: snap1.time,
        t2: snap2.time,
        speed1,
        speed2,
        ratio,
        bound,
        tolerance_factor,
        passed: ratio >= bound * tolerance_factor,
    })
}

/// Lower bound on the mean curvature along a tracked normal direction.
#[derive(Debug, Clone)]
pub struct VelocityFloorReport {
    pub direction: [f64; 3],
    pub times: Vec<f64>,
    pub mean_curvs: Vec<f64>,
    /// min over the window [t_x/2, t_x].
    pub min_mean_curv: f64,
    /// 10x the convexity floor.
    pub floor: f64,
    pub passed: bool,
}

/// Tracks the point with the same normal as (x, u(x, 0)) and reports the
/// minimum of H over snapshots in [t_x/2, t_x].
pub fn velocity_floor_check(
    traj: &Trajectory,
    x: [f64; 2],
    t_x: f64,
) -> Result<VelocityFloorReport> {
    if !(t_x > 0.0) {
        return Err(FlowError::InvalidParameter(format!(
            "t_x must be positive, got {t_x}"
        )));
    }
    let initial = traj.initial();
    let spec = initial.spec;
    let node = spec.nearest_node(x);
    let derivs0 = derivatives(initial)?;
    let id = spec.index(node[0], node[1]);
    let du = derivs0.du[id];
    let w = (1.0 + du[0] * du[0] + du[1] * du[1]).sqrt();
    let direction = [du[0] / w, du[1] / w, -1.0 / w];

    let lo = 0.5 * t_x;
    let mut times = Vec::new();
    let mut mean_curvs = Vec::new();
    for snap in &traj.snapshots {
        if snap.time + 1e-15 < lo || snap.time > t_x * (1.0 + 1e-12) {
            continue;
        }
        let derivs = derivatives(snap)?;
        let loc = locate_normal_direction(snap, &derivs, direction)?;
        times.push(snap.time);
        mean_curvs.push(mean_curv_at(snap, &derivs, &loc));
    }
    if times.is_empty() {
        return Err(FlowError::InvalidParameter(format!(
            "no snapshots inside the window [{lo}, {t_x}]"
        )));
    }
    let min_mean_curv = mean_curvs.iter().cloned().fold(f64::INFINITY, f64::min);
    let floor = 10.0 * traj.params.convexity_floor;
    Ok(VelocityFloorReport {
        direction,
        times,
        mean_curvs,
        min_mean_curv,
        floor,
        passed: min_mean_curv > floor,
    })
}
