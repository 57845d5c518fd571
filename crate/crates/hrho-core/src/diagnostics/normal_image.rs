//! Disjointness of gradient images: Du(B_r, t) against Du(outside B_R, 0).
//!
//! A fast norm screen (min outer |Du| - max inner |Du|) certifies
//! disjointness when it clears the margin, since |g1 - g2| >= ||g2| - |g1||;
//! otherwise the exact minimum pairwise distance is scanned.

use crate::error::{FlowError, Result};
use crate::geometry::derivatives;
use crate::grid::GridFunction;
use crate::solver::Trajectory;
use rayon::prelude::*;

/// Per-snapshot gap between the gradient images.
#[derive(Debug, Clone)]
pub struct DisjointnessReport {
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub horizon: f64,
    /// (t, margin, gap lower bound, disjoint) per snapshot with t <= horizon.
    pub per_time: Vec<(f64, f64, f64, bool)>,
    pub all_disjoint: bool,
}

impl DisjointnessReport {
    pub fn to_csv(&self) -> String {
        use crate::csvfmt::push_f64;
        let mut out = String::from("t,margin,gap,disjoint\n");
        for &(t, margin, gap, ok) in &self.per_time {
            push_f64(&mut out, t);
            out.push(',');
            push_f64(&mut out, margin);
            out.push(',');
            push_f64(&mut out, gap);
            out.push(',');
            out.push_str(if ok { "1" } else { "0" });
            out.push('\n');
        }
        out
    }
}

struct GradientSets {
    inner: Vec<[f64; 2]>,
    max_d2: f64,
}

fn gradient_samples(
    u: &GridFunction,
    keep: impl Fn(f64) -> bool,
) -> Result<GradientSets> {
    let derivs = derivatives(u)?;
    let spec = u.spec;
    let mut inner = Vec::new();
    let mut max_d2: f64 = 0.0;
    for iy in 0..spec.nodes_axis1() {
        for ix in 0..spec.nodes_per_axis() {
            let id = spec.index(ix, iy);
            for k in 0..3 {
                max_d2 = max_d2.max(derivs.d2u[id][k].abs());
            }
            let [x1, x2] = spec.position([ix, iy]);
            let r = (x1 * x1 + x2 * x2).sqrt();
            if keep(r) {
                inner.push(derivs.du[id]);
            }
        }
    }
    Ok(GradientSets { inner, max_d2 })
}

/// Checks Du(B_r, t) and Du(complement of B_R, 0) stay separated by
/// 2 dx max|D^2 u| for every snapshot time up to `horizon`.
pub fn normal_image_disjointness(
    traj: &Trajectory,
    inner_radius: f64,
    outer_radius: f64,
    horizon: f64,
) -> Result<DisjointnessReport> {
    if !(outer_radius > inner_radius && inner_radius > 0.0) {
        return Err(FlowError::InvalidParameter(format!(
            "need R > r > 0, got r = {inner_radius}, R = {outer_radius}"
        )));
    }
    let initial = traj.initial();
    let spec = initial.spec;
    if outer_radius > spec.half_width() * (spec.dim() as f64).sqrt() {
        return Err(FlowError::InvalidParameter(
            "outer radius lies outside the grid footprint".into(),
        ));
    }
    let outer = gradient_samples(initial, |r| r >= outer_radius)?;
    if outer.inner.is_empty() {
        return Err(FlowError::InvalidParameter(
            "no nodes outside the outer radius".into(),
        ));
    }
    let outer_min_norm = outer
        .inner
        .iter()
        .map(|g| (g[0] * g[0] + g[1] * g[1]).sqrt())
        .fold(f64::INFINITY, f64::min);

    let mut per_time = Vec::new();
    let mut all_disjoint = true;
    for snap in &traj.snapshots {
        if snap.time > horizon * (1.0 + 1e-12) {
            continue;
        }
        let dx = spec.dx();
        let inner = gradient_samples(snap, |r| r <= inner_radius)?;
        if inner.inner.is_empty() {
            return Err(FlowError::InvalidParameter(
                "no nodes inside the inner radius".into(),
            ));
        }
        let margin = 2.0 * dx * outer.max_d2.max(inner.max_d2);
        let inner_max_norm = inner
            .inner
            .iter()
            .map(|g| (g[0] * g[0] + g[1] * g[1]).sqrt())
            .fold(0.0, f64::max);
        // norm screen; exact pairwise fallback when inconclusive
        let mut gap = outer_min_norm - inner_max_norm;
        if gap < margin {
            gap = inner
                .inner
                .par_iter()
                .map(|gi| {
                    outer
                        .inner
                        .iter()
                        .map(|go| {
                            let d0 = gi[0] - go[0];
                            let d1 = gi[1] - go[1];
                            (d0 * d0 + d1 * d1).sqrt()
                        })
                        .fold(f64::INFINITY, f64::min)
                })
                .reduce(|| f64::INFINITY, f64::min);
        }
        let disjoint = gap >= margin;
        all_disjoint &= disjoint;
        per_time.push((snap.time, margin, gap, disjoint));
    }
    Ok(DisjointnessReport {
        inner_radius,
        outer_radius,
        horizon,
        per_time,
        all_disjoint,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::Scenario;
    use crate::solver::{run, FlowParams};

    #[test]
    fn initial_data_is_disjoint_by_strict_convexity() {
        let params = FlowParams::new(1.0, 1, 2.0, 0.01, 0.0);
        let spec = params.grid_spec().unwrap();
        let u0 = Scenario::Paraboloid.grid_function(&spec).unwrap();
        let traj = run(&u0, &params, 1).unwrap();
        let rep = normal_image_disjointness(&traj, 0.5, 1.5, 0.0).unwrap();
        assert!(rep.all_disjoint);
    }

    #[test]
    fn paraboloid_stays_disjoint_over_a_short_horizon() {
        let params = FlowParams::new(1.0, 1, 2.0, 0.01, 0.02);
        let spec = params.grid_spec().unwrap();
        let u0 = Scenario::Paraboloid.grid_function(&spec).unwrap();
        let traj = run(&u0, &params, 200).unwrap();
        let rep = normal_image_disjointness(&traj, 0.5, 1.5, 0.02).unwrap();
        assert!(rep.all_disjoint, "{:?}", rep.per_time);
    }

    #[test]
    fn long_horizons_flip_to_overlap_on_steepening_data() {
        // a shrinking cap steepens at fixed x, so pushing the horizon far
        // enough drives the inner gradient image into the initial outer one
        use crate::exact::SphereSolution;
        use crate::solver::BoundaryPolicy;
        let sphere = SphereSolution::new(1, 1.0, 2.0).unwrap();
        let mut params = FlowParams::new(1.0, 1, 0.5, 0.01, 1.2);
        params.boundary = BoundaryPolicy::BarrierDirichlet(sphere);
        let spec = params.grid_spec().unwrap();
        let u0 = sphere.cap_graph(&spec, 0.0).unwrap();
        let traj = run(&u0, &params, 2000).unwrap();
        let short = normal_image_disjointness(&traj, 0.3, 0.45, 0.05).unwrap();
        assert!(short.all_disjoint, "{:?}", short.per_time);
        let long = normal_image_disjointness(&traj, 0.3, 0.45, 1.2).unwrap();
        assert!(!long.all_disjoint, "{:?}", long.per_time);
    }

    #[test]
    fn bad_radii_are_rejected() {
        let params = FlowParams::new(1.0, 1, 2.0, 0.05, 0.0);
        let spec = params.grid_spec().unwrap();
        let u0 = Scenario::Paraboloid.grid_function(&spec).unwrap();
        let traj = run(&u0, &params, 1).unwrap();
        assert!(normal_image_disjointness(&traj, 1.5, 0.5, 0.0).is_err());
        assert!(normal_image_disjointness(&traj, 0.5, 5.0, 0.0).is_err());
    }
}
