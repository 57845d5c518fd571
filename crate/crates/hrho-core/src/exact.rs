//! Closed-form solutions and canonical initial data: shrinking spheres, the
//! sphere barriers built from them, and the scenario generators.
//!
//! A sphere of radius r moving with normal velocity H^rho shrinks by
//! r'(t) = -(c_H / r)^rho with H = c_H / r, so
//!     r(t) = (r(0)^{rho+1} - (rho+1) c_H^rho t)^{1/(rho+1)}.
//! With H defined as the sum of the principal curvatures, c_H = n for an
//! n-sphere; the coefficient is kept configurable.

use crate::error::{FlowError, Result};
use crate::geometry::pow_rho;
use crate::grid::{GridFunction, GridSpec};

/// Exact shrinking-sphere state used as oracle and barrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereSolution {
    /// Centre in R^{n+1}; slot layout [c1, c2, c_{n+1}], c2 = 0 for n = 1.
    pub center: [f64; 3],
    pub initial_radius: f64,
    pub rho: f64,
    pub dim: usize,
    /// c_H in H = c_H / r.  Defaults to n (sum of principal curvatures).
    pub curvature_sum_coefficient: f64,
}

impl SphereSolution {
    /// Sphere with its south pole at the origin (centre (0, ..., 0, r0)).
    pub fn new(dim: usize, rho: f64, initial_radius: f64) -> Result<Self> {
        Self::with_center(dim, rho, initial_radius, [0.0, 0.0, initial_radius])
    }

    pub fn with_center(dim: usize, rho: f64, initial_radius: f64, center: [f64; 3]) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(FlowError::InvalidParameter(format!(
                "sphere dimension must be 1 or 2, got {dim}"
            )));
        }
        if !(rho > 0.0) {
            return Err(FlowError::InvalidParameter(format!(
                "rho must be > 0, got {rho}"
            )));
        }
        if !(initial_radius > 0.0) {
            return Err(FlowError::InvalidParameter(format!(
                "initial radius must be > 0, got {initial_radius}"
            )));
        }
        Ok(Self {
            center,
            initial_radius,
            rho,
            dim,
            curvature_sum_coefficient: dim as f64,
        })
    }

    /// Same sphere with an explicit curvature-sum coefficient.
    pub fn with_coefficient(mut self, c: f64) -> Self {
        self.curvature_sum_coefficient = c;
        self
    }

    /// Time at which the radius reaches zero:
    /// t* = r0^{rho+1} / ((rho+1) c_H^rho).
    pub fn extinction_time(&self) -> f64 {
        let c = self.curvature_sum_coefficient;
        self.initial_radius.powf(self.rho + 1.0) / ((self.rho + 1.0) * pow_rho(c, self.rho))
    }

    /// Radius of the evolving sphere, exact to floating point.
    pub fn radius(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(FlowError::InvalidParameter(format!(
                "time must be >= 0, got {t}"
            )));
        }
        let c = self.curvature_sum_coefficient;
        let inner = self.initial_radius.powf(self.rho + 1.0)
            - (self.rho + 1.0) * pow_rho(c, self.rho) * t;
        if inner < 0.0 {
            return Err(FlowError::SphereExtinct {
                time: t,
                extinction: self.extinction_time(),
            });
        }
        Ok(inner.powf(1.0 / (self.rho + 1.0)))
    }

    /// H(t) = c_H / r(t).
    pub fn mean_curvature(&self, t: f64) -> Result<f64> {
        Ok(self.curvature_sum_coefficient / self.radius(t)?)
    }

    /// F(t) = (c_H / r(t))^rho.
    pub fn speed(&self, t: f64) -> Result<f64> {
        Ok(pow_rho(self.mean_curvature(t)?, self.rho))
    }

    /// Height of the lower cap over the horizontal point `x` at time `t`:
    /// u(x, t) = c_{n+1} - sqrt(r(t)^2 - |x - c_h|^2).  The centre is fixed
    /// in time; only the radius shrinks.
    pub fn cap_height(&self, x: [f64; 2], t: f64) -> Result<f64> {
        let r = self.radius(t)?;
        let dx0 = x[0] - self.center[0];
        let dx1 = x[1] - self.center[1];
        let s2 = dx0 * dx0 + dx1 * dx1;
        if s2 >= r * r {
            return Err(FlowError::GridExceedsCap {
                required: s2.sqrt(),
                available: r,
            });
        }
        Ok(self.center[2] - (r * r - s2).sqrt())
    }

    /// Lower cap written as a graph over the grid.  Every grid node must lie
    /// strictly inside the cap projection.
    pub fn cap_graph(&self, spec: &GridSpec, t: f64) -> Result<GridFunction> {
        let r = self.radius(t)?;
        // furthest grid corner from the horizontal centre
        let mut worst: f64 = 0.0;
        for &cx in &[-spec.half_width(), spec.half_width()] {
            let d0 = cx - self.center[0];
            if spec.dim() == 2 {
                for &cy in &[-spec.half_width(), spec.half_width()] {
                    let d1 = cy - self.center[1];
                    worst = worst.max((d0 * d0 + d1 * d1).sqrt());
                }
            } else {
                worst = worst.max(d0.abs());
            }
        }
        if worst >= r {
            return Err(FlowError::GridExceedsCap {
                required: worst,
                available: r,
            });
        }
        let mut u = GridFunction::from_fn(*spec, |x1, x2| {
            let d0 = x1 - self.center[0];
            let d1 = x2 - self.center[1];
            self.center[2] - (r * r - d0 * d0 - d1 * d1).sqrt()
        });
        u.time = t;
        Ok(u)
    }

    /// Speed ratio F(t2)/F(t1) against the Harnack bound (t1/t2)^{rho/(rho+1)}
    /// in closed form; the normal direction drops out on the sphere.
    pub fn harnack_ratio(&self, t1: f64, t2: f64) -> Result<(f64, f64)> {
        if !(t1 > 0.0 && t2 >= t1) {
            return Err(FlowError::InvalidParameter(format!(
                "need 0 < t1 <= t2, got ({t1}, {t2})"
            )));
        }
        let ratio = self.speed(t2)? / self.speed(t1)?;
        let bound = (t1 / t2).powf(self.rho / (self.rho + 1.0));
        Ok((ratio, bound))
    }
}

/// Barrier data solved from the cap-containment equation
/// ((h + eps/2)^{rho+1} - (rho+1) c_H^rho T)^{1/(rho+1)} = sqrt(h^2 + r_eps^2):
/// a sphere of radius h + eps/2 centred at (0, h + eps) still contains the
/// ring at radius r_eps and height eps at time T.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierSpec {
    pub eps: f64,
    pub r_eps: f64,
    pub horizon: f64,
    pub rho: f64,
    pub dim: usize,
    pub curvature_sum_coefficient: f64,
    /// Root of the containment equation.
    pub h: f64,
    /// delta = eps / 2.
    pub delta: f64,
    /// r_delta = h + eps / 2.
    pub r_delta: f64,
}

impl BarrierSpec {
    /// The barrier sphere: centre (0, h + eps), initial radius h + eps/2.
    pub fn sphere(&self) -> SphereSolution {
        SphereSolution {
            center: [0.0, 0.0, self.h + self.eps],
            initial_radius: self.h + self.eps / 2.0,
            rho: self.rho,
            dim: self.dim,
            curvature_sum_coefficient: self.curvature_sum_coefficient,
        }
    }

    /// Residual of the defining equation at `h` (signed; negative when the
    /// sphere is too small or vanishes before the horizon).
    pub fn residual(eps: f64, r_eps: f64, horizon: f64, rho: f64, c: f64, h: f64) -> f64 {
        let inner = (h + eps / 2.0).powf(rho + 1.0) - (rho + 1.0) * pow_rho(c, rho) * horizon;
        let rhs = (h * h + r_eps * r_eps).sqrt();
        if inner <= 0.0 {
            return -rhs;
        }
        inner.powf(1.0 / (rho + 1.0)) - rhs
    }
}

/// Solves the barrier equation by bisection on [eps/2, 1e6 max(r_eps, T, 1)]
/// to 1e-12 absolute in h.
pub fn solve_barrier(eps: f64, r_eps: f64, horizon: f64, rho: f64, dim: usize) -> Result<BarrierSpec> {
    solve_barrier_with_coefficient(eps, r_eps, horizon, rho, dim, dim as f64)
}

pub fn solve_barrier_with_coefficient(
    eps: f64,
    r_eps: f64,
    horizon: f64,
    rho: f64,
    dim: usize,
    c: f64,
) -> Result<BarrierSpec> {
    if !(eps > 0.0 && r_eps > 0.0 && horizon >= 0.0 && rho > 0.0) {
        return Err(FlowError::InvalidParameter(format!(
            "barrier needs eps, r_eps > 0, T >= 0, rho > 0; got ({eps}, {r_eps}, {horizon}, {rho})"
        )));
    }
    if dim != 1 && dim != 2 {
        return Err(FlowError::InvalidParameter(format!(
            "dimension must be 1 or 2, got {dim}"
        )));
    }
    let f = |h: f64| BarrierSpec::residual(eps, r_eps, horizon, rho, c, h);
    let mut lo = eps / 2.0;
    let mut hi = 1e6 * r_eps.max(horizon).max(1.0);
    let flo = f(lo);
    let fhi = f(hi);
    if flo > 0.0 || fhi < 0.0 {
        return Err(FlowError::BarrierBracket);
    }
    // monotone residual: plain bisection
    for _ in 0..200 {
        if hi - lo <= 1e-12 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let h = 0.5 * (lo + hi);
    Ok(BarrierSpec {
        eps,
        r_eps,
        horizon,
        rho,
        dim,
        curvature_sum_coefficient: c,
        h,
        delta: eps / 2.0,
        r_delta: h + eps / 2.0,
    })
}

/// Canonical initial data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scenario {
    /// u = |x|^2; the normal oscillation decays at infinity.
    Paraboloid,
    /// u = a |x|^2.
    ScaledParaboloid { coefficient: f64 },
    /// Strictly convex smoothing of max{x^1, -x^1, x^2, -x^2}:
    /// u = mu log(sum_i exp(x^i/mu) + exp(-x^i/mu)).  Converges uniformly to
    /// the cone as mu -> 0 (distance mu log(2n)) and keeps its large normal
    /// jumps across the edges, so the normal oscillation does not decay.
    SmoothedCone { smoothing: f64 },
    /// Lower hemisphere cap of radius r0 with the south pole at the origin.
    Hemisphere { initial_radius: f64 },
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Paraboloid => "paraboloid",
            Scenario::ScaledParaboloid { .. } => "scaled_paraboloid",
            Scenario::SmoothedCone { .. } => "smoothed_cone",
            Scenario::Hemisphere { .. } => "hemisphere",
        }
    }

    /// Initial datum on the grid.
    pub fn grid_function(&self, spec: &GridSpec) -> Result<GridFunction> {
        match *self {
            Scenario::Paraboloid => Ok(GridFunction::from_fn(*spec, |x, y| x * x + y * y)),
            Scenario::ScaledParaboloid { coefficient } => {
                if !(coefficient > 0.0) {
                    return Err(FlowError::InvalidParameter(format!(
                        "scaled_paraboloid coefficient must be > 0, got {coefficient}"
                    )));
                }
                Ok(GridFunction::from_fn(*spec, move |x, y| {
                    coefficient * (x * x + y * y)
                }))
            }
            Scenario::SmoothedCone { smoothing } => {
                if !(smoothing > 0.0) {
                    return Err(FlowError::InvalidParameter(format!(
                        "smoothed_cone smoothing must be > 0, got {smoothing}"
                    )));
                }
                let dim = spec.dim();
                Ok(GridFunction::from_fn(*spec, move |x, y| {
                    let mut args = [x, -x, y, -y];
                    let k = 2 * dim;
                    let args = &mut args[..k];
                    for a in args.iter_mut() {
                        *a /= smoothing;
                    }
                    // stable log-sum-exp
                    let m = args.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let s: f64 = args.iter().map(|a| (a - m).exp()).sum();
                    smoothing * (m + s.ln())
                }))
            }
            Scenario::Hemisphere { initial_radius } => {
                SphereSolution::new(spec.dim(), 1.0, initial_radius)?.cap_graph(spec, 0.0)
            }
        }
    }
}
