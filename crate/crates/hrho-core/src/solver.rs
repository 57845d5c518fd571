//! Explicit time stepping of the graphical flow
//!     du/dt = sqrt(1 + |Du|^2) H^rho
//! on a truncated box, plus the comparison and domain-nesting studies built
//! on top of it.
//!
//! Forward Euler with a parabolic step bound
//!     dt <= safety * dx^2 / (2 n max_nodes(W rho H^{rho-1})),
//! the diffusion scale of the linearization.  One step is a pure map from a
//! grid function to the next; node updates are independent, the step-bound
//! reduction is an exact max, so results do not depend on evaluation order.

use crate::error::{FlowError, Result};
use crate::exact::SphereSolution;
use crate::geometry::{self, cfl_coefficient, point_geometry, pow_rho};
use crate::grid::{GridFunction, GridSpec};
use rayon::prelude::*;

/// Grids at least this large are processed with rayon.
const PAR_THRESHOLD: usize = 4096;

/// Steps below this are treated as stiffness failure.
const DT_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeStepPolicy {
    Fixed { dt: f64 },
    /// dt = safety * dx^2 / (2 n max(W rho H^{rho-1})), safety in (0, 1].
    ParabolicCfl { safety: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryPolicy {
    /// Boundary nodes keep their initial values.
    FrozenDirichlet,
    /// Boundary nodes follow an exact evolving cap.
    BarrierDirichlet(SphereSolution),
    /// Boundary increments are linearly extrapolated from the two nearest
    /// interior increments along the inward axis (diagonal at corners),
    /// second-order accurate for smooth updates.
    Extrapolation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowParams {
    pub rho: f64,
    pub dim: usize,
    pub half_width: f64,
    pub dx: f64,
    pub time_step: TimeStepPolicy,
    pub t_end: f64,
    pub boundary: BoundaryPolicy,
    /// Minimum admissible H on the interior; default 1e-12.
    pub convexity_floor: f64,
}

impl FlowParams {
    pub fn new(rho: f64, dim: usize, half_width: f64, dx: f64, t_end: f64) -> Self {
        Self {
            rho,
            dim,
            half_width,
            dx,
            time_step: TimeStepPolicy::ParabolicCfl { safety: 0.9 },
            t_end,
            boundary: BoundaryPolicy::Extrapolation,
            convexity_floor: 1e-12,
        }
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.dim, self.half_width, self.dx)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0) {
            return Err(FlowError::InvalidParameter(format!(
                "rho must be > 0, got {}",
                self.rho
            )));
        }
        if !(self.t_end >= 0.0) {
            return Err(FlowError::InvalidParameter(format!(
                "t_end must be >= 0, got {}",
                self.t_end
            )));
        }
        if !(self.convexity_floor > 0.0) {
            return Err(FlowError::InvalidParameter(
                "convexity floor must be positive".into(),
            ));
        }
        match self.time_step {
            TimeStepPolicy::Fixed { dt } if !(dt > 0.0) => {
                return Err(FlowError::InvalidParameter(format!(
                    "fixed dt must be > 0, got {dt}"
                )))
            }
            TimeStepPolicy::ParabolicCfl { safety } if !(safety > 0.0 && safety <= 1.0) => {
                return Err(FlowError::InvalidParameter(format!(
                    "CFL safety must lie in (0, 1], got {safety}"
                )))
            }
            _ => {}
        }
        if matches!(self.boundary, BoundaryPolicy::Extrapolation) {
            let spec = self.grid_spec()?;
            if spec.nodes_per_axis() < 5 {
                return Err(FlowError::InvalidParameter(
                    "extrapolation boundary needs at least 5 nodes per axis".into(),
                ));
            }
        }
        self.grid_spec().map(|_| ())
    }
}

/// Per-step diagnostics record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    /// Time after the step.
    pub time: f64,
    pub dt: f64,
    pub min_mean_curv: f64,
    pub max_mean_curv: f64,
    /// Max interior |Du|.
    pub max_gradient: f64,
    /// Max interior W H^rho.
    pub max_speed: f64,
    /// Interior nodes below the convexity floor (zero in any recorded step).
    pub masked_nodes: usize,
    /// dx^2 / (2 n max(W rho H^{rho-1})) evaluated on the pre-step state.
    pub cfl_limit: f64,
}

/// Time-ordered snapshots plus per-step records.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub params: FlowParams,
    pub snapshots: Vec<GridFunction>,
    pub records: Vec<StepRecord>,
}

impl Trajectory {
    pub fn initial(&self) -> &GridFunction {
        &self.snapshots[0]
    }

    pub fn final_state(&self) -> &GridFunction {
        self.snapshots.last().expect("trajectory has snapshots")
    }

    /// Snapshot whose time is closest to `t`.
    pub fn snapshot_nearest(&self, t: f64) -> &GridFunction {
        self.snapshots
            .iter()
            .min_by(|a, b| {
                (a.time - t)
                    .abs()
                    .partial_cmp(&(b.time - t).abs())
                    .expect("finite times")
            })
            .expect("trajectory has snapshots")
    }

    /// Step records as CSV.
    pub fn records_to_csv(&self) -> String {
        use crate::csvfmt::push_f64;
        let mut out =
            String::from("t,dt,min_h,max_h,max_grad,max_speed,masked_nodes,cfl_limit\n");
        for r in &self.records {
            for (k, v) in [
                r.time,
                r.dt,
                r.min_mean_curv,
                r.max_mean_curv,
                r.max_gradient,
                r.max_speed,
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
            out.push_str(&r.masked_nodes.to_string());
            out.push(',');
            push_f64(&mut out, r.cfl_limit);
            out.push('\n');
        }
        out
    }

    /// Snapshots in long format: one row per node per snapshot.
    pub fn snapshots_to_csv(&self) -> String {
        use crate::csvfmt::push_f64;
        let mut out = String::from("t,x1,x2,u\n");
        for snap in &self.snapshots {
            let spec = snap.spec;
            for iy in 0..spec.nodes_axis1() {
                for ix in 0..spec.nodes_per_axis() {
                    let [x1, x2] = spec.position([ix, iy]);
                    push_f64(&mut out, snap.time);
                    out.push(',');
                    push_f64(&mut out, x1);
                    out.push(',');
                    push_f64(&mut out, x2);
                    out.push(',');
                    push_f64(&mut out, snap.value([ix, iy]));
                    out.push('\n');
                }
            }
        }
        out
    }
}

/// Interior speeds and step-bound data computed before a step commits.
struct StepPlan {
    /// W H^rho per node (interior only; boundary slots zero).
    speed: Vec<f64>,
    min_h: f64,
    max_h: f64,
    max_grad: f64,
    max_speed: f64,
    /// dx^2 / (2 n max coeff); infinite on an all-flat interior cannot occur
    /// because the convexity check errors first.
    cfl_limit: f64,
}

/// Evaluates interior geometry, failing on any node below the convexity
/// floor.
fn plan_step(u: &GridFunction, params: &FlowParams) -> Result<StepPlan> {
    let spec = u.spec;
    let nx = spec.nodes_per_axis();
    let ny = spec.nodes_axis1();
    let dim = spec.dim();
    let dx = spec.dx();
    let rho = params.rho;
    let floor = params.convexity_floor;
    let values = &u.values;

    // per interior node: speed, or the first convexity failure
    struct RowStats {
        min_h: f64,
        max_h: f64,
        max_grad2: f64,
        max_speed: f64,
        max_coeff: f64,
        bad: Option<(usize, f64)>, // linear id, H
    }

    let row_range = if dim == 1 { 0..1 } else { 1..ny - 1 };
    let eval_row = |iy: usize, speed_row: &mut [f64]| -> RowStats {
        let mut st = RowStats {
            min_h: f64::INFINITY,
            max_h: f64::NEG_INFINITY,
            max_grad2: 0.0,
            max_speed: 0.0,
            max_coeff: 0.0,
            bad: None,
        };
        let base = iy * nx;
        for ix in 1..nx - 1 {
            let id = base + ix;
            let c = values[id];
            let u1 = (values[id + 1] - values[id - 1]) / (2.0 * dx);
            let u11 = (values[id + 1] - 2.0 * c + values[id - 1]) / (dx * dx);
            let (du, d2u);
            if dim == 1 {
                du = [u1, 0.0];
                d2u = [u11, 0.0, 0.0];
            } else {
                let up = values[id + nx];
                let dn = values[id - nx];
                let u2 = (up - dn) / (2.0 * dx);
                let u22 = (up - 2.0 * c + dn) / (dx * dx);
                // mixed derivative as the axis-1 difference of the axis-0
                // gradient, matching the full-field construction bitwise
                let du0_up = (values[id + nx + 1] - values[id + nx - 1]) / (2.0 * dx);
                let du0_dn = (values[id - nx + 1] - values[id - nx - 1]) / (2.0 * dx);
                let u12 = (du0_up - du0_dn) / (2.0 * dx);
                du = [u1, u2];
                d2u = [u11, u22, u12];
            }
            let pg = point_geometry(dim, du, d2u);
            let h = pg.mean_curv;
            if !(h > floor) {
                if st.bad.is_none() {
                    st.bad = Some((id, h));
                }
                continue;
            }
            let s = pg.w * pow_rho(h, rho);
            speed_row[ix] = s;
            let grad2 = du[0] * du[0] + du[1] * du[1];
            st.min_h = st.min_h.min(h);
            st.max_h = st.max_h.max(h);
            st.max_grad2 = st.max_grad2.max(grad2);
            st.max_speed = st.max_speed.max(s);
            st.max_coeff = st.max_coeff.max(cfl_coefficient(pg.w, h, rho));
        }
        st
    };

    let mut speed = vec![0.0; spec.node_count()];
    let stats: Vec<RowStats> = if spec.node_count() >= PAR_THRESHOLD && dim == 2 {
        let rows: Vec<(usize, &mut [f64])> = speed
            .chunks_mut(nx)
            .enumerate()
            .filter(|(iy, _)| row_range.contains(iy))
            .collect();
        rows.into_par_iter()
            .map(|(iy, speed_row)| eval_row(iy, speed_row))
            .collect()
    } else {
        let mut v = Vec::new();
        for (iy, speed_row) in speed.chunks_mut(nx).enumerate() {
            if row_range.contains(&iy) {
                v.push(eval_row(iy, speed_row));
            }
        }
        v
    };

    let mut min_h = f64::INFINITY;
    let mut max_h = f64::NEG_INFINITY;
    let mut max_grad2: f64 = 0.0;
    let mut max_speed: f64 = 0.0;
    let mut max_coeff: f64 = 0.0;
    let mut bad: Option<(usize, f64)> = None;
    for st in stats {
        min_h = min_h.min(st.min_h);
        max_h = max_h.max(st.max_h);
        max_grad2 = max_grad2.max(st.max_grad2);
        max_speed = max_speed.max(st.max_speed);
        max_coeff = max_coeff.max(st.max_coeff);
        if bad.is_none() {
            bad = st.bad;
        } else if let (Some((ida, _)), Some((idb, _))) = (bad, st.bad) {
            if idb < ida {
                bad = st.bad;
            }
        }
    }
    if let Some((id, h)) = bad {
        return Err(FlowError::ConvexityLost {
            node: spec.node_of(id),
            mean_curv: h,
            time: u.time,
        });
    }
    let cfl_limit = dx * dx / (2.0 * dim as f64 * max_coeff);
    Ok(StepPlan {
        speed,
        min_h,
        max_h,
        max_grad: max_grad2.sqrt(),
        max_speed,
        cfl_limit,
    })
}

/// Step size from the policy, before clipping at t_end.
fn policy_dt(params: &FlowParams, plan: &StepPlan) -> f64 {
    match params.time_step {
        TimeStepPolicy::Fixed { dt } => dt,
        TimeStepPolicy::ParabolicCfl { safety } => safety * plan.cfl_limit,
    }
}

/// Clips a policy step against the horizon.  A step that would (almost)
/// reach t_end absorbs the remainder and lands on t_end exactly, so no
/// sub-rounding crumb of time is ever left over.
fn clip_dt(time: f64, policy: f64, t_end: f64) -> (f64, f64) {
    let remaining = t_end - time;
    if policy >= remaining * (1.0 - 1e-9) {
        (remaining, t_end)
    } else {
        (policy, time + policy)
    }
}

/// Commits a planned step with the given dt, landing on `t_new`.
fn apply_step(
    u: &GridFunction,
    plan: &StepPlan,
    dt: f64,
    t_new: f64,
    params: &FlowParams,
) -> Result<(GridFunction, StepRecord)> {
    let spec = u.spec;
    let nx = spec.nodes_per_axis();
    let ny = spec.nodes_axis1();
    let dim = spec.dim();

    let mut out = vec![0.0; spec.node_count()];
    let write_interior = |out: &mut [f64]| {
        for iy in 0..ny {
            let base = iy * nx;
            let interior_row = dim == 1 || (iy >= 1 && iy + 1 < ny);
            for ix in 0..nx {
                let id = base + ix;
                if interior_row && ix >= 1 && ix + 1 < nx {
                    out[id] = u.values[id] + dt * plan.speed[id];
                } else {
                    out[id] = u.values[id];
                }
            }
        }
    };
    write_interior(&mut out);

    match &params.boundary {
        BoundaryPolicy::FrozenDirichlet => {}
        BoundaryPolicy::BarrierDirichlet(sphere) => {
            let mut set = |node: [usize; 2]| -> Result<()> {
                let id = spec.index(node[0], node[1]);
                out[id] = sphere.cap_height(spec.position(node), t_new)?;
                Ok(())
            };
            if dim == 1 {
                set([0, 0])?;
                set([nx - 1, 0])?;
            } else {
                for ix in 0..nx {
                    set([ix, 0])?;
                    set([ix, ny - 1])?;
                }
                for iy in 1..ny - 1 {
                    set([0, iy])?;
                    set([nx - 1, iy])?;
                }
            }
        }
        BoundaryPolicy::Extrapolation => {
            let inc = |id: usize| dt * plan.speed[id];
            if dim == 1 {
                out[0] = u.values[0] + (2.0 * inc(1) - inc(2));
                out[nx - 1] = u.values[nx - 1] + (2.0 * inc(nx - 2) - inc(nx - 3));
            } else {
                // edges: extrapolate along the inward perpendicular axis
                for ix in 1..nx - 1 {
                    let lo = spec.index(ix, 0);
                    out[lo] = u.values[lo] + (2.0 * inc(spec.index(ix, 1)) - inc(spec.index(ix, 2)));
                    let hi = spec.index(ix, ny - 1);
                    out[hi] = u.values[hi]
                        + (2.0 * inc(spec.index(ix, ny - 2)) - inc(spec.index(ix, ny - 3)));
                }
                for iy in 1..ny - 1 {
                    let lo = spec.index(0, iy);
                    out[lo] = u.values[lo] + (2.0 * inc(spec.index(1, iy)) - inc(spec.index(2, iy)));
                    let hi = spec.index(nx - 1, iy);
                    out[hi] = u.values[hi]
                        + (2.0 * inc(spec.index(nx - 2, iy)) - inc(spec.index(nx - 3, iy)));
                }
                // corners: inward diagonal
                let corners = [
                    ([0, 0], [1usize, 1usize], [2usize, 2usize]),
                    ([nx - 1, 0], [nx - 2, 1], [nx - 3, 2]),
                    ([0, ny - 1], [1, ny - 2], [2, ny - 3]),
                    ([nx - 1, ny - 1], [nx - 2, ny - 2], [nx - 3, ny - 3]),
                ];
                for (c, d1, d2) in corners {
                    let id = spec.index(c[0], c[1]);
                    out[id] = u.values[id]
                        + (2.0 * inc(spec.index(d1[0], d1[1])) - inc(spec.index(d2[0], d2[1])));
                }
            }
        }
    }

    let record = StepRecord {
        time: t_new,
        dt,
        min_mean_curv: plan.min_h,
        max_mean_curv: plan.max_h,
        max_gradient: plan.max_grad,
        max_speed: plan.max_speed,
        masked_nodes: 0,
        cfl_limit: plan.cfl_limit,
    };
    Ok((
        GridFunction {
            spec,
            time: t_new,
            values: out,
        },
        record,
    ))
}

/// One forward-Euler step.  The step is clipped so it never overshoots
/// `params.t_end`; otherwise the output time is input time + policy dt.
pub fn step(u: &GridFunction, params: &FlowParams) -> Result<(GridFunction, StepRecord)> {
    params.validate()?;
    u.check_finite()?;
    let plan = plan_step(u, params)?;
    let policy = policy_dt(params, &plan);
    if policy < DT_FLOOR {
        return Err(FlowError::StiffnessFailure {
            dt: policy,
            time: u.time,
        });
    }
    let (dt, t_new) = if params.t_end > u.time {
        clip_dt(u.time, policy, params.t_end)
    } else {
        (policy, u.time + policy)
    };
    apply_step(u, &plan, dt, t_new, params)
}

/// Runs the flow to `t_end`, recording the initial datum, every
/// `snapshot_every`-th state and the final state.
///
/// The initial datum must be strictly convex on the interior (all principal
/// curvatures positive).
pub fn run(u0: &GridFunction, params: &FlowParams, snapshot_every: usize) -> Result<Trajectory> {
    params.validate()?;
    u0.check_finite()?;
    let expected = params.grid_spec()?;
    if u0.spec != expected {
        return Err(FlowError::InvalidParameter(
            "initial datum grid does not match the flow parameters".into(),
        ));
    }
    let fields = geometry::geometry_fields(u0, params.rho)?;
    for iy in 0..u0.spec.nodes_axis1() {
        for ix in 0..u0.spec.nodes_per_axis() {
            if u0.spec.is_interior([ix, iy]) {
                let id = u0.spec.index(ix, iy);
                if !(fields.lambdas[id][0] > 0.0) {
                    return Err(FlowError::ConvexityLost {
                        node: [ix, iy],
                        mean_curv: fields.mean_curv[id],
                        time: u0.time,
                    });
                }
            }
        }
    }
    let cadence = snapshot_every.max(1);
    let mut traj = Trajectory {
        params: params.clone(),
        snapshots: vec![u0.clone()],
        records: Vec::new(),
    };
    if params.t_end <= u0.time {
        return Ok(traj);
    }
    let mut current = u0.clone();
    let mut steps = 0usize;
    loop {
        let plan = plan_step(&current, params)?;
        let policy = policy_dt(params, &plan);
        if policy < DT_FLOOR {
            return Err(FlowError::StiffnessFailure {
                dt: policy,
                time: current.time,
            });
        }
        let (dt, t_new) = clip_dt(current.time, policy, params.t_end);
        let (next, record) = apply_step(&current, &plan, dt, t_new, params)?;
        traj.records.push(record);
        steps += 1;
        current = next;
        let done = current.time >= params.t_end;
        if done || steps % cadence == 0 {
            traj.snapshots.push(current.clone());
        }
        if done {
            break;
        }
    }
    Ok(traj)
}

/// Result of a lockstep ordered pair run.
#[derive(Debug, Clone, Copy)]
pub struct OrderingReport {
    /// max over steps and interior nodes of (u_low - u_high)+.
    pub max_violation: f64,
    pub time_of_max: f64,
    pub steps: usize,
    /// 10 dx^2.
    pub threshold: f64,
    pub passed: bool,
}

/// Runs an ordered pair in lockstep (shared dt = min of the two policy steps
/// each step) and reports the worst ordering violation over all steps.
pub fn comparison_run(
    u0_low: &GridFunction,
    u0_high: &GridFunction,
    params: &FlowParams,
) -> Result<OrderingReport> {
    params.validate()?;
    if u0_low.spec != u0_high.spec {
        return Err(FlowError::InvalidParameter(
            "ordered pair must share one grid".into(),
        ));
    }
    for id in 0..u0_low.values.len() {
        if u0_low.values[id] > u0_high.values[id] {
            return Err(FlowError::InvalidParameter(format!(
                "initial data not ordered at node {:?}",
                u0_low.spec.node_of(id)
            )));
        }
    }
    let spec = u0_low.spec;
    let mut low = u0_low.clone();
    let mut high = u0_high.clone();
    let mut max_violation: f64 = 0.0;
    let mut time_of_max = 0.0;
    let mut steps = 0usize;
    while low.time < params.t_end {
        let plan_low = plan_step(&low, params)?;
        let plan_high = plan_step(&high, params)?;
        let policy = policy_dt(params, &plan_low).min(policy_dt(params, &plan_high));
        if policy < DT_FLOOR {
            return Err(FlowError::StiffnessFailure {
                dt: policy,
                time: low.time,
            });
        }
        let (dt, t_new) = clip_dt(low.time, policy, params.t_end);
        let (nl, _) = apply_step(&low, &plan_low, dt, t_new, params)?;
        let (nh, _) = apply_step(&high, &plan_high, dt, t_new, params)?;
        low = nl;
        high = nh;
        steps += 1;
        for iy in 0..spec.nodes_axis1() {
            for ix in 0..spec.nodes_per_axis() {
                if !spec.is_interior([ix, iy]) {
                    continue;
                }
                let id = spec.index(ix, iy);
                let v = low.values[id] - high.values[id];
                if v > max_violation {
                    max_violation = v;
                    time_of_max = low.time;
                }
            }
        }
    }
    let threshold = 10.0 * spec.dx() * spec.dx();
    Ok(OrderingReport {
        max_violation,
        time_of_max,
        steps,
        threshold,
        passed: max_violation <= threshold,
    })
}

/// Worst signed excess of a trajectory over an exact evolving cap.
#[derive(Debug, Clone, Copy)]
pub struct BarrierOrderingReport {
    /// max over snapshots and nodes of u - cap (negative when strictly below).
    pub max_excess: f64,
    pub time_of_max: f64,
    pub passed: bool,
}

/// Checks that every snapshot stays below the exact evolving cap on the
/// whole grid footprint.  The barrier needs no numerical run.
pub fn barrier_ordering(traj: &Trajectory, sphere: &SphereSolution) -> Result<BarrierOrderingReport> {
    let mut max_excess = f64::NEG_INFINITY;
    let mut time_of_max = 0.0;
    for snap in &traj.snapshots {
        let spec = snap.spec;
        for iy in 0..spec.nodes_axis1() {
            for ix in 0..spec.nodes_per_axis() {
                let cap = sphere.cap_height(spec.position([ix, iy]), snap.time)?;
                let excess = snap.value([ix, iy]) - cap;
                if excess > max_excess {
                    max_excess = excess;
                    time_of_max = snap.time;
                }
            }
        }
    }
    Ok(BarrierOrderingReport {
        max_excess,
        time_of_max,
        passed: max_excess < 0.0,
    })
}

/// Domain-nesting convergence study.
#[derive(Debug, Clone)]
pub struct NestedDomainReport {
    pub domains: Vec<f64>,
    /// Shared fixed step used by every run.
    pub dt: f64,
    /// sup over the observation window and snapshot times of
    /// |u^{(k+1)} - u^{(k)}|, one entry per consecutive pair.
    pub diffs: Vec<f64>,
    /// Per-domain sup over window and times of |u - reference|, when a
    /// reference solution is supplied.
    pub reference_errors: Option<Vec<f64>>,
    /// True when fewer than two domains were given.
    pub degenerate: bool,
}

/// Runs the same initial datum on a nested list of truncated domains with a
/// shared fixed step and compares consecutive runs on the observation window
/// [-L1/2, L1/2]^n.  Each step checks the shared dt against the running
/// parabolic bound.
pub fn nested_domain_study(
    generator: impl Fn(&GridSpec) -> Result<GridFunction>,
    params: &FlowParams,
    domains: &[f64],
    snapshot_every: usize,
    reference: Option<&dyn Fn(f64, f64, f64) -> f64>,
) -> Result<NestedDomainReport> {
    if domains.is_empty() {
        return Err(FlowError::InvalidParameter(
            "domain list must not be empty".into(),
        ));
    }
    for w in domains.windows(2) {
        if !(w[0] < w[1]) {
            return Err(FlowError::InvalidParameter(
                "domain list must be strictly increasing".into(),
            ));
        }
    }

    // shared fixed step from the most restrictive initial bound
    let mut dt = match params.time_step {
        TimeStepPolicy::Fixed { dt } => dt,
        TimeStepPolicy::ParabolicCfl { safety } => {
            let mut bound = f64::INFINITY;
            for &l in domains {
                let mut p = params.clone();
                p.half_width = l;
                let spec = p.grid_spec()?;
                let u0 = generator(&spec)?;
                let plan = plan_step(&u0, &p)?;
                bound = bound.min(safety * plan.cfl_limit);
            }
            0.8 * bound
        }
    };
    dt = dt.min(params.t_end.max(DT_FLOOR));

    let mut runs = Vec::with_capacity(domains.len());
    for &l in domains {
        let mut p = params.clone();
        p.half_width = l;
        p.time_step = TimeStepPolicy::Fixed { dt };
        let spec = p.grid_spec()?;
        let u0 = generator(&spec)?;
        let traj = run_with_cfl_guard(&u0, &p, snapshot_every)?;
        runs.push(traj);
    }

    let window = domains[0] / 2.0;
    let in_window = |x: f64| x.abs() <= window + 1e-12;

    let diffs = runs
        .windows(2)
        .map(|pair| {
            let (a, b) = (&pair[0], &pair[1]);
            assert_eq!(a.snapshots.len(), b.snapshots.len());
            let mut sup: f64 = 0.0;
            for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
                debug_assert!((sa.time - sb.time).abs() <= 1e-12 * sa.time.max(1.0));
                sup = sup.max(window_sup(sa, sb, in_window));
            }
            sup
        })
        .collect();

    let reference_errors = reference.map(|f| {
        runs.iter()
            .map(|traj| {
                let mut sup: f64 = 0.0;
                for snap in &traj.snapshots {
                    let spec = snap.spec;
                    for iy in 0..spec.nodes_axis1() {
                        for ix in 0..spec.nodes_per_axis() {
                            let [x1, x2] = spec.position([ix, iy]);
                            if in_window(x1) && (spec.dim() == 1 || in_window(x2)) {
                                sup = sup.max((snap.value([ix, iy]) - f(x1, x2, snap.time)).abs());
                            }
                        }
                    }
                }
                sup
            })
            .collect()
    });

    Ok(NestedDomainReport {
        domains: domains.to_vec(),
        dt,
        diffs,
        reference_errors,
        degenerate: domains.len() < 2,
    })
}

/// Like [`run`] but errors when the fixed step exceeds the running parabolic
/// bound.
fn run_with_cfl_guard(
    u0: &GridFunction,
    params: &FlowParams,
    snapshot_every: usize,
) -> Result<Trajectory> {
    let traj = run(u0, params, snapshot_every)?;
    for r in &traj.records {
        if r.dt > r.cfl_limit {
            return Err(FlowError::CflExceeded {
                dt: r.dt,
                limit: r.cfl_limit,
                time: r.time,
            });
        }
    }
    Ok(traj)
}

/// sup |a - b| over aligned nodes inside the window (grids may differ in
/// half-width but share spacing and centre).
fn window_sup(a: &GridFunction, b: &GridFunction, in_window: impl Fn(f64) -> bool) -> f64 {
    let sa = a.spec;
    let sb = b.spec;
    let offset = ((sb.half_width() - sa.half_width()) / sa.dx()).round() as usize;
    let mut sup: f64 = 0.0;
    for iy in 0..sa.nodes_axis1() {
        for ix in 0..sa.nodes_per_axis() {
            let [x1, x2] = sa.position([ix, iy]);
            if !in_window(x1) || (sa.dim() == 2 && !in_window(x2)) {
                continue;
            }
            let jb = if sb.dim() == 2 { iy + offset } else { 0 };
            let d = (a.value([ix, iy]) - b.value([ix + offset, jb])).abs();
            sup = sup.max(d);
        }
    }
    sup
}

/// Max deviation from parabolic rescaling invariance: if u solves the flow,
/// so does lambda u(x / lambda, t / lambda^{rho+1}).  Runs the generator at
/// the base scale and at `scale`, then compares the rescaled trajectories at
/// matching snapshots.  Returns (deviation, threshold 10 dx_scaled^2).
pub fn scaling_symmetry_deviation(
    generator: impl Fn(&GridSpec) -> Result<GridFunction>,
    params: &FlowParams,
    scale: f64,
    snapshot_every: usize,
) -> Result<(f64, f64)> {
    if !(scale > 0.0) {
        return Err(FlowError::InvalidParameter("scale must be > 0".into()));
    }
    let base_spec = params.grid_spec()?;
    let u0 = generator(&base_spec)?;
    let base = run(&u0, params, snapshot_every)?;

    let mut scaled_params = params.clone();
    scaled_params.half_width = params.half_width * scale;
    scaled_params.dx = params.dx * scale;
    scaled_params.t_end = params.t_end * scale.powf(params.rho + 1.0);
    if let TimeStepPolicy::Fixed { dt } = params.time_step {
        scaled_params.time_step = TimeStepPolicy::Fixed {
            dt: dt * scale.powf(params.rho + 1.0),
        };
    }
    let scaled_spec = scaled_params.grid_spec()?;
    // lambda u0(x / lambda) at the scaled nodes is the base datum scaled
    // node-for-node, because the two grids are aligned by construction.
    let scaled_u0 = GridFunction {
        spec: scaled_spec,
        time: 0.0,
        values: u0.values.iter().map(|v| scale * v).collect(),
    };
    let scaled = run(&scaled_u0, &scaled_params, snapshot_every)?;

    if base.snapshots.len() != scaled.snapshots.len() {
        return Err(FlowError::InvalidParameter(format!(
            "scaled run produced {} snapshots vs {}; step counts diverged",
            scaled.snapshots.len(),
            base.snapshots.len()
        )));
    }
    let mut dev: f64 = 0.0;
    for (sb, ss) in base.snapshots.iter().zip(&scaled.snapshots) {
        for id in 0..sb.values.len() {
            dev = dev.max((scale * sb.values[id] - ss.values[id]).abs());
        }
    }
    let threshold = 10.0 * scaled_spec.dx() * scaled_spec.dx();
    Ok((dev, threshold))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::Scenario;

    fn paraboloid_params(t_end: f64) -> FlowParams {
        FlowParams::new(1.0, 1, 2.0, 0.02, t_end)
    }

    #[test]
    fn affine_datum_is_rejected() {
        let params = paraboloid_params(0.01);
        let spec = params.grid_spec().unwrap();
        let u = GridFunction::from_fn(spec, |x, _| 0.5 * x);
        assert!(matches!(
            step(&u, &params),
            Err(FlowError::ConvexityLost { .. })
        ));
    }

    #[test]
    fn step_bookkeeping_and_monotonicity() {
        let params = paraboloid_params(1.0);
        let spec = params.grid_spec().unwrap();
        let u = Scenario::Paraboloid.grid_function(&spec).unwrap();
        let (next, rec) = step(&u, &params).unwrap();
        assert_eq!(next.time, u.time + rec.dt);
        assert!(rec.dt > 0.0 && rec.dt <= 0.9 * rec.cfl_limit * (1.0 + 1e-12));
        for iy in 0..spec.nodes_axis1() {
            for ix in 0..spec.nodes_per_axis() {
                if spec.is_interior([ix, iy]) {
                    assert!(next.value([ix, iy]) > u.value([ix, iy]));
                }
            }
        }
    }

    #[test]
    fn hemisphere_step_matches_exact_motion() {
        // one step of the cap datum moves by dt * W * (c_H/r0)^rho + O(dx^2)
        let mut params = FlowParams::new(1.0, 1, 0.5, 0.01, 1.0);
        let sphere = SphereSolution::new(1, 1.0, 2.0).unwrap();
        params.boundary = BoundaryPolicy::BarrierDirichlet(sphere);
        let spec = params.grid_spec().unwrap();
        let u = sphere.cap_graph(&spec, 0.0).unwrap();
        let (next, rec) = step(&u, &params).unwrap();
        for iy in 0..spec.nodes_axis1() {
            for ix in 0..spec.nodes_per_axis() {
                if !spec.is_interior([ix, iy]) {
                    continue;
                }
                let [x1, _] = spec.position([ix, iy]);
                let w = 2.0 / (4.0 - x1 * x1).sqrt(); // r / sqrt(r^2 - x^2)
                let expect = u.value([ix, iy]) + rec.dt * w * (1.0 / 2.0);
                assert!(
                    (next.value([ix, iy]) - expect).abs() < rec.dt * 5.0 * 1e-4,
                    "node {ix}"
                );
            }
        }
    }

    #[test]
    fn zero_horizon_returns_single_snapshot() {
        let params = paraboloid_params(0.0);
        let spec = params.grid_spec().unwrap();
        let u = Scenario::Paraboloid.grid_function(&spec).unwrap();
        let traj = run(&u, &params, 10).unwrap();
        assert_eq!(traj.snapshots.len(), 1);
        assert!(traj.records.is_empty());
    }

    #[test]
    fn run_reaches_t_end_exactly_and_monotone() {
        let params = paraboloid_params(0.003);
        let spec = params.grid_spec().unwrap();
        let u = Scenario::Paraboloid.grid_function(&spec).unwrap();
        let traj = run(&u, &params, 7).unwrap();
        assert_eq!(traj.final_state().time, 0.003);
        let mut prev = -1.0;
        for s in &traj.snapshots {
            assert!(s.time > prev);
            prev = s.time;
        }
        let mid = spec.nodes_per_axis() / 2;
        for pair in traj.snapshots.windows(2) {
            assert!(pair[1].value([mid, 0]) > pair[0].value([mid, 0]));
        }
        for r in &traj.records {
            assert!(r.min_mean_curv > params.convexity_floor);
        }
    }

    #[test]
    fn identical_inputs_have_zero_violation() {
        let params = paraboloid_params(0.002);
        let spec = params.grid_spec().unwrap();
        let u = Scenario::Paraboloid.grid_function(&spec).unwrap();
        let rep = comparison_run(&u, &u, &params).unwrap();
        assert_eq!(rep.max_violation, 0.0);
        assert!(rep.passed);
    }

    #[test]
    fn shifted_pair_stays_ordered() {
        let params = paraboloid_params(0.002);
        let spec = params.grid_spec().unwrap();
        let low = Scenario::Paraboloid.grid_function(&spec).unwrap();
        let mut high = low.clone();
        for v in &mut high.values {
            *v += 0.1;
        }
        let rep = comparison_run(&low, &high, &params).unwrap();
        assert!(rep.passed, "violation {}", rep.max_violation);
    }

    #[test]
    fn unordered_pair_is_rejected() {
        let params = paraboloid_params(0.002);
        let spec = params.grid_spec().unwrap();
        let low = Scenario::Paraboloid.grid_function(&spec).unwrap();
        let mut high = low.clone();
        let mid = spec.nodes_per_axis() / 2;
        high.values[spec.index(mid, 0)] -= 0.05;
        assert!(comparison_run(&low, &high, &params).is_err());
    }

    #[test]
    fn degenerate_domain_study() {
        let params = paraboloid_params(0.001);
        let rep = nested_domain_study(
            |spec| Scenario::Paraboloid.grid_function(spec),
            &params,
            &[2.0],
            50,
            None,
        )
        .unwrap();
        assert!(rep.degenerate);
        assert!(rep.diffs.is_empty());
    }
}
