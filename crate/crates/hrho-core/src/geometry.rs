//! Pointwise differential geometry of a graph from finite-difference samples.
//!
//! For u: R^n -> R the graph carries
//!   g_ij  = delta_ij + u_i u_j,          g^ij = delta^ij - u^i u^j / (1 + |Du|^2),
//!   nu    = (Du, -1) / W,                W    = sqrt(1 + |Du|^2),
//!   h_ij  = u_ij / W,                    H    = h_ij g^ij,
//!   K     = det h / det g,               F    = H^rho,
//! with the principal curvatures the eigenvalues of h with respect to g.
//! All derivatives are second-order central differences at interior nodes and
//! second-order one-sided stencils at the boundary, so the scheme is exact on
//! polynomials of degree <= 2.

use crate::error::{FlowError, Result};
use crate::grid::{GridFunction, GridSpec};
use rayon::prelude::*;

/// Nodes with H below this threshold are flagged as not mean-convex and the
/// speed F = H^rho is left undefined there.
pub const MEAN_CONVEXITY_FLOOR: f64 = 1e-12;

/// Grids at least this large are processed with rayon.
const PAR_THRESHOLD: usize = 4096;

/// First and second finite-difference derivatives of a grid function.
///
/// `du` stores [u_1, u_2] and `d2u` stores [u_11, u_22, u_12]; the unused
/// slots are zero when n = 1.  The mixed derivative is computed once (as the
/// axis-1 difference of the axis-0 difference), so u_12 = u_21 by
/// construction.
#[derive(Debug, Clone)]
pub struct Derivatives {
    pub spec: GridSpec,
    pub du: Vec<[f64; 2]>,
    pub d2u: Vec<[f64; 3]>,
}

/// One-dimensional first derivative with second-order one-sided ends.
fn d1_at(line: &[f64], i: usize, dx: f64) -> f64 {
    let n = line.len();
    if i == 0 {
        (-3.0 * line[0] + 4.0 * line[1] - line[2]) / (2.0 * dx)
    } else if i + 1 == n {
        (3.0 * line[n - 1] - 4.0 * line[n - 2] + line[n - 3]) / (2.0 * dx)
    } else {
        (line[i + 1] - line[i - 1]) / (2.0 * dx)
    }
}

/// One-dimensional second derivative; one-sided ends need four nodes, a
/// three-node axis falls back to the centred stencil of the middle node.
fn d2_at(line: &[f64], i: usize, dx: f64) -> f64 {
    let n = line.len();
    let dx2 = dx * dx;
    if i == 0 {
        if n >= 4 {
            (2.0 * line[0] - 5.0 * line[1] + 4.0 * line[2] - line[3]) / dx2
        } else {
            (line[0] - 2.0 * line[1] + line[2]) / dx2
        }
    } else if i + 1 == n {
        if n >= 4 {
            (2.0 * line[n - 1] - 5.0 * line[n - 2] + 4.0 * line[n - 3] - line[n - 4]) / dx2
        } else {
            (line[n - 1] - 2.0 * line[n - 2] + line[n - 3]) / dx2
        }
    } else {
        (line[i + 1] - 2.0 * line[i] + line[i - 1]) / dx2
    }
}

/// Finite-difference gradient and Hessian fields of `u`.
pub fn derivatives(u: &GridFunction) -> Result<Derivatives> {
    u.check_finite()?;
    let spec = u.spec;
    let nx = spec.nodes_per_axis();
    let ny = spec.nodes_axis1();
    let dx = spec.dx();
    let count = spec.node_count();

    let mut du = vec![[0.0; 2]; count];
    let mut d2u = vec![[0.0; 3]; count];

    // axis 0: rows are contiguous
    for iy in 0..ny {
        let row = &u.values[iy * nx..(iy + 1) * nx];
        for ix in 0..nx {
            let id = spec.index(ix, iy);
            du[id][0] = d1_at(row, ix, dx);
            d2u[id][0] = d2_at(row, ix, dx);
        }
    }

    if spec.dim() == 2 {
        // axis 1: gather columns
        let mut col = vec![0.0; ny];
        let mut col_du0 = vec![0.0; ny];
        for ix in 0..nx {
            for iy in 0..ny {
                col[iy] = u.values[spec.index(ix, iy)];
                col_du0[iy] = du[spec.index(ix, iy)][0];
            }
            for iy in 0..ny {
                let id = spec.index(ix, iy);
                du[id][1] = d1_at(&col, iy, dx);
                d2u[id][1] = d2_at(&col, iy, dx);
                // mixed derivative: axis-1 difference of the axis-0 gradient
                d2u[id][2] = d1_at(&col_du0, iy, dx);
            }
        }
    }

    Ok(Derivatives { spec, du, d2u })
}

/// Metric, normal and curvature data of a single graph point.
#[derive(Debug, Clone, Copy)]
pub struct PointGeometry {
    /// W = sqrt(1 + |Du|^2); equals the gradient function v.
    pub w: f64,
    /// [g_11, g_22, g_12]
    pub g_lo: [f64; 3],
    /// [g^11, g^22, g^12]
    pub g_up: [f64; 3],
    /// [h_11, h_22, h_12]
    pub h: [f64; 3],
    /// H = h_ij g^ij
    pub mean_curv: f64,
}

/// Evaluates the graph geometry of one node from its derivatives.
#[inline]
pub fn point_geometry(dim: usize, du: [f64; 2], d2u: [f64; 3]) -> PointGeometry {
    let grad2 = du[0] * du[0] + du[1] * du[1];
    let w2 = 1.0 + grad2;
    let w = w2.sqrt();
    let g_lo = [1.0 + du[0] * du[0], 1.0 + du[1] * du[1], du[0] * du[1]];
    let g_up = [
        1.0 - du[0] * du[0] / w2,
        1.0 - du[1] * du[1] / w2,
        -du[0] * du[1] / w2,
    ];
    let h = [d2u[0] / w, d2u[1] / w, d2u[2] / w];
    let mean_curv = if dim == 1 {
        g_up[0] * h[0]
    } else {
        g_up[0] * h[0] + g_up[1] * h[1] + 2.0 * g_up[2] * h[2]
    };
    PointGeometry {
        w,
        g_lo,
        g_up,
        h,
        mean_curv,
    }
}

/// Principal curvatures, ascending.  Computed from the symmetrized similarity
/// transform S h S with S = g^{-1/2} = I - a a^T / (W (W + 1)), a = Du, which
/// has the same eigenvalues as g^{-1} h but stays symmetric under rounding.
/// For n = 1 the second slot is zero.
#[inline]
pub fn principal_curvatures(dim: usize, du: [f64; 2], pg: &PointGeometry) -> [f64; 2] {
    if dim == 1 {
        [pg.h[0] / pg.g_lo[0], 0.0]
    } else {
        let c = 1.0 / (pg.w * (pg.w + 1.0));
        let s11 = 1.0 - du[0] * du[0] * c;
        let s22 = 1.0 - du[1] * du[1] * c;
        let s12 = -du[0] * du[1] * c;
        // b = s h, a = b s
        let b11 = s11 * pg.h[0] + s12 * pg.h[2];
        let b12 = s11 * pg.h[2] + s12 * pg.h[1];
        let b21 = s12 * pg.h[0] + s22 * pg.h[2];
        let b22 = s12 * pg.h[2] + s22 * pg.h[1];
        let a11 = b11 * s11 + b12 * s12;
        let a22 = b21 * s12 + b22 * s22;
        let a12 = 0.5 * ((b11 * s12 + b12 * s22) + (b21 * s11 + b22 * s12));
        let mid = 0.5 * (a11 + a22);
        let half_diff = 0.5 * (a11 - a22);
        let disc = (half_diff * half_diff + a12 * a12).sqrt();
        [mid - disc, mid + disc]
    }
}

/// F = H^rho with fast paths for the exponents exercised most.
#[inline]
pub fn pow_rho(h: f64, rho: f64) -> f64 {
    if rho == 1.0 {
        h
    } else if rho == 2.0 {
        h * h
    } else if rho == 0.5 {
        h.sqrt()
    } else {
        h.powf(rho)
    }
}

/// W rho H^{rho-1}: the largest eigenvalue scale of the linearization F^ij
/// times W, which drives the parabolic step bound.
#[inline]
pub fn cfl_coefficient(w: f64, h: f64, rho: f64) -> f64 {
    if rho == 1.0 {
        w
    } else if rho == 2.0 {
        2.0 * w * h
    } else if rho == 0.5 {
        0.5 * w / h.sqrt()
    } else {
        w * rho * h.powf(rho - 1.0)
    }
}

/// All pointwise geometric fields of a graph, stored per node.
///
/// `speed` and `diffusion` (F and F^ij = rho H^{rho-1} g^ij) are only defined
/// where `mean_convex` holds; they are stored as zero elsewhere.
#[derive(Debug, Clone)]
pub struct GeometryFields {
    pub spec: GridSpec,
    pub time: f64,
    pub rho: f64,
    pub du: Vec<[f64; 2]>,
    pub d2u: Vec<[f64; 3]>,
    /// W = sqrt(1 + |Du|^2) = the gradient function v (>= 1 everywhere).
    pub w: Vec<f64>,
    /// Downward unit normal (nu^1, nu^2, nu^{n+1}); nu^2 = 0 for n = 1.
    pub nu: Vec<[f64; 3]>,
    pub g_lo: Vec<[f64; 3]>,
    pub g_up: Vec<[f64; 3]>,
    pub h: Vec<[f64; 3]>,
    pub mean_curv: Vec<f64>,
    pub gauss_curv: Vec<f64>,
    /// Principal curvatures, ascending; second slot unused for n = 1.
    pub lambdas: Vec<[f64; 2]>,
    pub speed: Vec<f64>,
    pub diffusion: Vec<[f64; 3]>,
    pub mean_convex: Vec<bool>,
}

/// Computes every pointwise field of the graph of `u` for speed exponent
/// `rho`.  Nodes with H <= the mean-convexity floor are masked, not fatal.
pub fn geometry_fields(u: &GridFunction, rho: f64) -> Result<GeometryFields> {
    if !(rho > 0.0) {
        return Err(FlowError::InvalidParameter(format!(
            "rho must be > 0, got {rho}"
        )));
    }
    let derivs = derivatives(u)?;
    let spec = u.spec;
    let dim = spec.dim();
    let count = spec.node_count();

    struct NodeOut {
        w: f64,
        nu: [f64; 3],
        g_lo: [f64; 3],
        g_up: [f64; 3],
        h: [f64; 3],
        mean: f64,
        gauss: f64,
        lambdas: [f64; 2],
        speed: f64,
        diffusion: [f64; 3],
        mean_convex: bool,
    }

    let eval = |id: usize| -> NodeOut {
        let du = derivs.du[id];
        let d2u = derivs.d2u[id];
        let pg = point_geometry(dim, du, d2u);
        let nu = if dim == 1 {
            [du[0] / pg.w, 0.0, -1.0 / pg.w]
        } else {
            [du[0] / pg.w, du[1] / pg.w, -1.0 / pg.w]
        };
        let gauss = if dim == 1 {
            pg.h[0] / pg.g_lo[0]
        } else {
            (pg.h[0] * pg.h[1] - pg.h[2] * pg.h[2])
                / (pg.g_lo[0] * pg.g_lo[1] - pg.g_lo[2] * pg.g_lo[2])
        };
        let lambdas = principal_curvatures(dim, du, &pg);
        let mean_convex = pg.mean_curv > MEAN_CONVEXITY_FLOOR;
        let (speed, diffusion) = if mean_convex {
            let coeff = rho * pow_rho(pg.mean_curv, rho) / pg.mean_curv;
            (
                pow_rho(pg.mean_curv, rho),
                [coeff * pg.g_up[0], coeff * pg.g_up[1], coeff * pg.g_up[2]],
            )
        } else {
            (0.0, [0.0; 3])
        };
        NodeOut {
            w: pg.w,
            nu,
            g_lo: pg.g_lo,
            g_up: pg.g_up,
            h: pg.h,
            mean: pg.mean_curv,
            gauss,
            lambdas,
            speed,
            diffusion,
            mean_convex,
        }
    };

    let outs: Vec<NodeOut> = if count >= PAR_THRESHOLD {
        (0..count).into_par_iter().map(eval).collect()
    } else {
        (0..count).map(eval).collect()
    };

    let mut fields = GeometryFields {
        spec,
        time: u.time,
        rho,
        du: derivs.du,
        d2u: derivs.d2u,
        w: Vec::with_capacity(count),
        nu: Vec::with_capacity(count),
        g_lo: Vec::with_capacity(count),
        g_up: Vec::with_capacity(count),
        h: Vec::with_capacity(count),
        mean_curv: Vec::with_capacity(count),
        gauss_curv: Vec::with_capacity(count),
        lambdas: Vec::with_capacity(count),
        speed: Vec::with_capacity(count),
        diffusion: Vec::with_capacity(count),
        mean_convex: Vec::with_capacity(count),
    };
    for o in outs {
        fields.w.push(o.w);
        fields.nu.push(o.nu);
        fields.g_lo.push(o.g_lo);
        fields.g_up.push(o.g_up);
        fields.h.push(o.h);
        fields.mean_curv.push(o.mean);
        fields.gauss_curv.push(o.gauss);
        fields.lambdas.push(o.lambdas);
        fields.speed.push(o.speed);
        fields.diffusion.push(o.diffusion);
        fields.mean_convex.push(o.mean_convex);
    }
    Ok(fields)
}

impl GeometryFields {
    /// Smallest principal curvature over interior nodes.
    pub fn min_interior_lambda(&self) -> f64 {
        let mut min = f64::INFINITY;
        for iy in 0..self.spec.nodes_axis1() {
            for ix in 0..self.spec.nodes_per_axis() {
                if self.spec.is_interior([ix, iy]) {
                    min = min.min(self.lambdas[self.spec.index(ix, iy)][0]);
                }
            }
        }
        min
    }

    /// One row per node, one column per scalar field.
    pub fn to_csv(&self) -> String {
        use crate::csvfmt::push_f64;
        let mut out = String::new();
        out.push_str(
            "x1,x2,w,nu1,nu2,nu3,g11,g22,g12,gup11,gup22,gup12,h11,h22,h12,\
             mean_curv,gauss_curv,lambda1,lambda2,speed,diff11,diff22,diff12,mean_convex\n",
        );
        for iy in 0..self.spec.nodes_axis1() {
            for ix in 0..self.spec.nodes_per_axis() {
                let id = self.spec.index(ix, iy);
                let [x1, x2] = self.spec.position([ix, iy]);
                let cols = [
                    x1,
                    x2,
                    self.w[id],
                    self.nu[id][0],
                    self.nu[id][1],
                    self.nu[id][2],
                    self.g_lo[id][0],
                    self.g_lo[id][1],
                    self.g_lo[id][2],
                    self.g_up[id][0],
                    self.g_up[id][1],
                    self.g_up[id][2],
                    self.h[id][0],
                    self.h[id][1],
                    self.h[id][2],
                    self.mean_curv[id],
                    self.gauss_curv[id],
                    self.lambdas[id][0],
                    self.lambdas[id][1],
                    self.speed[id],
                    self.diffusion[id][0],
                    self.diffusion[id][1],
                    self.diffusion[id][2],
                ];
                let mut first = true;
                for c in cols {
                    if !first {
                        out.push(',');
                    }
                    push_f64(&mut out, c);
                    first = false;
                }
                out.push(',');
                out.push(if self.mean_convex[id] { '1' } else { '0' });
                out.push('\n');
            }
        }
        out
    }
}

/// Right-hand side of the graphical flow in divergence form,
/// W (div(Du / W))^rho, expanded by the chain rule from the same derivative
/// samples.  Agrees with W H^rho from [`geometry_fields`] to rounding; the
/// two routes are kept separate as a standing cross-check.
///
/// Returns the speed per node and the mean-convexity mask; masked values are
/// zero.
pub fn divergence_form_speed(u: &GridFunction, rho: f64) -> Result<(Vec<f64>, Vec<bool>)> {
    if !(rho > 0.0) {
        return Err(FlowError::InvalidParameter(format!(
            "rho must be > 0, got {rho}"
        )));
    }
    let derivs = derivatives(u)?;
    let dim = u.spec.dim();
    let count = u.spec.node_count();
    let mut speed = vec![0.0; count];
    let mut mask = vec![false; count];
    for id in 0..count {
        let du = derivs.du[id];
        let [u11, u22, u12] = derivs.d2u[id];
        let w2 = 1.0 + du[0] * du[0] + du[1] * du[1];
        let w = w2.sqrt();
        let w3 = w * w2;
        // div(Du/W) = sum_i u_ii / W - u_i (Du . D u_i) / W^3
        let div = if dim == 1 {
            u11 / w - du[0] * (du[0] * u11) / w3
        } else {
            (u11 + u22) / w
                - (du[0] * (du[0] * u11 + du[1] * u12) + du[1] * (du[0] * u12 + du[1] * u22)) / w3
        };
        if div > MEAN_CONVEXITY_FLOOR {
            speed[id] = w * pow_rho(div, rho);
            mask[id] = true;
        }
    }
    Ok((speed, mask))
}

/// Distance from the graph point over `x0` to the embedded tangent plane at
/// the graph point over `x`:  |u(x0) - u(x) - <Du(x), x0 - x>| / W(x).
pub fn tangent_plane_distance(u: &GridFunction, x: [usize; 2], x0: [usize; 2]) -> Result<f64> {
    if x == x0 {
        return Err(FlowError::InvalidParameter(
            "tangent-plane distance needs two distinct nodes".into(),
        ));
    }
    u.check_finite()?;
    let spec = u.spec;
    let nx = spec.nodes_per_axis();
    let ny = spec.nodes_axis1();
    let dx = spec.dx();

    // gradient at x only
    let row: Vec<f64> = (0..nx).map(|i| u.values[spec.index(i, x[1])]).collect();
    let mut du = [d1_at(&row, x[0], dx), 0.0];
    if spec.dim() == 2 {
        let col: Vec<f64> = (0..ny).map(|j| u.values[spec.index(x[0], j)]).collect();
        du[1] = d1_at(&col, x[1], dx);
    }

    let p = spec.position(x);
    let p0 = spec.position(x0);
    let w = (1.0 + du[0] * du[0] + du[1] * du[1]).sqrt();
    let num = u.value(x0) - u.value(x) - (du[0] * (p0[0] - p[0]) + du[1] * (p0[1] - p[1]));
    Ok(num.abs() / w)
}
