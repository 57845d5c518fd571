//! Normal-oscillation profiles: for each radius r, the supremum of
//! |nu(p) - nu(q)| over graph points p, q with |p|, |q| >= r and
//! |p - q| < d (d = 1 by default; exposed because any fixed cutoff gives an
//! equivalent condition on entire graphs).

use crate::error::{FlowError, Result};
use crate::geometry::derivatives;
use crate::grid::{norm3, sub3, GridFunction};
use crate::solver::Trajectory;
use rayon::prelude::*;

const PAR_THRESHOLD: usize = 4096;

/// Oscillation of the normal outside growing balls.
#[derive(Debug, Clone)]
pub struct NuProfile {
    pub time: f64,
    pub radii: Vec<f64>,
    /// sup |nu(p) - nu(q)| per radius; `None` when no admissible pair exists.
    pub eps_of_r: Vec<Option<f64>>,
    pub pair_counts: Vec<usize>,
    pub pair_distance: f64,
}

impl NuProfile {
    pub fn to_csv(&self) -> String {
        use crate::csvfmt::push_f64;
        let mut out = String::from("r,eps,pairs\n");
        for (i, &r) in self.radii.iter().enumerate() {
            push_f64(&mut out, r);
            out.push(',');
            match self.eps_of_r[i] {
                Some(e) => push_f64(&mut out, e),
                None => out.push_str("nan"),
            }
            out.push(',');
            out.push_str(&self.pair_counts[i].to_string());
            out.push('\n');
        }
        out
    }
}

/// Deterministic all-pairs scan of the normal oscillation outside each
/// radius.  Pairs are grid-node graph points within `pair_distance` of each
/// other in R^{n+1}.
pub fn nu_profile(u: &GridFunction, radii: &[f64], pair_distance: f64) -> Result<NuProfile> {
    if radii.is_empty() {
        return Err(FlowError::InvalidParameter("radii list is empty".into()));
    }
    for w in radii.windows(2) {
        if !(w[0] < w[1]) {
            return Err(FlowError::InvalidParameter(
                "radii must be strictly increasing".into(),
            ));
        }
    }
    if !(pair_distance > 0.0) {
        return Err(FlowError::InvalidParameter(
            "pair distance must be positive".into(),
        ));
    }
    let spec = u.spec;
    let derivs = derivatives(u)?;
    let count = spec.node_count();

    let mut points = vec![[0.0; 3]; count];
    let mut normals = vec![[0.0; 3]; count];
    let mut point_norm = vec![0.0; count];
    for iy in 0..spec.nodes_axis1() {
        for ix in 0..spec.nodes_per_axis() {
            let id = spec.index(ix, iy);
            let p = u.graph_point([ix, iy]);
            let du = derivs.du[id];
            let w = (1.0 + du[0] * du[0] + du[1] * du[1]).sqrt();
            points[id] = p;
            normals[id] = [du[0] / w, du[1] / w, -1.0 / w];
            point_norm[id] = norm3(p);
        }
    }

    let max_norm = point_norm.iter().cloned().fold(0.0, f64::max);
    let r_max = *radii.last().expect("nonempty radii");
    if max_norm < r_max + pair_distance {
        return Err(FlowError::InvalidParameter(format!(
            "grid footprint (max |p| = {max_norm:.3}) too small for radius {r_max} + pair distance {pair_distance}"
        )));
    }

    // only pairs with |x - y| < pair_distance can satisfy |p - q| < it
    let reach = (pair_distance / spec.dx()).ceil() as usize;
    let nx = spec.nodes_per_axis();
    let ny = spec.nodes_axis1();

    let scan_node = |id: usize, r: f64| -> (f64, usize) {
        if point_norm[id] < r {
            return (0.0, 0);
        }
        let [ix, iy] = spec.node_of(id);
        let mut local_max: f64 = 0.0;
        let mut local_count = 0usize;
        let y_lo = iy.saturating_sub(reach);
        let y_hi = (iy + reach).min(ny - 1);
        let x_lo = ix.saturating_sub(reach);
        let x_hi = (ix + reach).min(nx - 1);
        for jy in y_lo..=y_hi {
            for jx in x_lo..=x_hi {
                let jd = spec.index(jx, jy);
                if jd <= id || point_norm[jd] < r {
                    continue;
                }
                if norm3(sub3(points[id], points[jd])) < pair_distance {
                    local_count += 1;
                    let d = norm3(sub3(normals[id], normals[jd]));
                    local_max = local_max.max(d);
                }
            }
        }
        (local_max, local_count)
    };

    let mut eps_of_r = Vec::with_capacity(radii.len());
    let mut pair_counts = Vec::with_capacity(radii.len());
    for &r in radii {
        let (sup, pairs) = if count >= PAR_THRESHOLD {
            (0..count)
                .into_par_iter()
                .map(|id| scan_node(id, r))
                .reduce(|| (0.0, 0), |a, b| (a.0.max(b.0), a.1 + b.1))
        } else {
            (0..count)
                .map(|id| scan_node(id, r))
                .fold((0.0_f64, 0), |a, b| (a.0.max(b.0), a.1 + b.1))
        };
        eps_of_r.push(if pairs > 0 { Some(sup) } else { None });
        pair_counts.push(pairs);
    }

    Ok(NuProfile {
        time: u.time,
        radii: radii.to_vec(),
        eps_of_r,
        pair_counts,
        pair_distance,
    })
}

/// Profiles along a trajectory checked against the initial profile.
#[derive(Debug, Clone)]
pub struct NuPreservationReport {
    pub profiles: Vec<NuProfile>,
    /// Allowed excess over the initial profile: 10 dx.
    pub slack: f64,
    /// max over radii and snapshot times of eps(r, t) - eps(r, 0).
    pub max_excess: f64,
    pub passed: bool,
}

/// Evaluates the profile at every snapshot and asserts
/// eps(r, t) <= eps(r, 0) + 10 dx at every radius and time.
pub fn nu_preservation_check(
    traj: &Trajectory,
    radii: &[f64],
    pair_distance: f64,
) -> Result<NuPreservationReport> {
    let mut profiles = Vec::with_capacity(traj.snapshots.len());
    for snap in &traj.snapshots {
        profiles.push(nu_profile(snap, radii, pair_distance)?);
    }
    let slack = 10.0 * traj.snapshots[0].spec.dx();
    let base = &profiles[0];
    let mut max_excess = f64::NEG_INFINITY;
    for prof in &profiles[1..] {
        for (i, eps) in prof.eps_of_r.iter().enumerate() {
            if let (Some(now), Some(start)) = (eps, base.eps_of_r[i]) {
                max_excess = max_excess.max(now - start);
            }
        }
    }
    if !max_excess.is_finite() {
        // single snapshot or no common radii: trivially preserved
        max_excess = 0.0;
    }
    Ok(NuPreservationReport {
        profiles,
        slack,
        max_excess,
        passed: max_excess <= slack,
    })
}
