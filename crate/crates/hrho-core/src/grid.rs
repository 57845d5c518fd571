//! Uniform grids over the box [-L, L]^n, n in {1, 2}, and scalar fields on them.
//!
//! Grids are node-centred with an odd node count per axis so the origin is
//! always a node.  In one dimension the second axis degenerates to a single
//! slot; all index helpers take an `[ix, iy]` pair with `iy = 0` for n = 1.

use crate::error::{FlowError, Result};

/// Relative tolerance for checking that 2L/dx is an even integer.
const SPACING_TOL: f64 = 1e-9;

/// Geometry of a uniform node-centred grid on [-L, L]^dim.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    dim: usize,
    half_width: f64,
    dx: f64,
    nodes_per_axis: usize,
}

impl GridSpec {
    /// Builds a grid specification, checking that `dim` is 1 or 2 and that
    /// the spacing divides the half-width so the origin lands on a node.
    pub fn new(dim: usize, half_width: f64, dx: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(FlowError::InvalidGrid(format!(
                "dimension must be 1 or 2, got {dim}"
            )));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(FlowError::InvalidGrid(format!(
                "half-width must be positive, got {half_width}"
            )));
        }
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(FlowError::InvalidGrid(format!(
                "spacing must be positive, got {dx}"
            )));
        }
        let steps = 2.0 * half_width / dx;
        let rounded = steps.round();
        if (steps - rounded).abs() > SPACING_TOL * steps.max(1.0) {
            return Err(FlowError::InvalidGrid(format!(
                "2L/dx = {steps} is not an integer (L = {half_width}, dx = {dx})"
            )));
        }
        let steps = rounded as usize;
        if steps % 2 != 0 {
            return Err(FlowError::InvalidGrid(format!(
                "2L/dx = {steps} must be even so the origin is a node"
            )));
        }
        if steps < 2 {
            return Err(FlowError::InvalidGrid(
                "grid needs at least 3 nodes per axis".into(),
            ));
        }
        Ok(Self {
            dim,
            half_width,
            dx,
            nodes_per_axis: steps + 1,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.nodes_per_axis
    }

    /// Number of nodes along the second axis (1 when dim = 1).
    pub fn nodes_axis1(&self) -> usize {
        if self.dim == 2 {
            self.nodes_per_axis
        } else {
            1
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes_per_axis * self.nodes_axis1()
    }

    /// Physical coordinate of node index `i` along either axis.
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.dx
    }

    /// Linear index of the node `[ix, iy]`.
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nodes_per_axis + ix
    }

    /// Inverse of [`GridSpec::index`].
    pub fn node_of(&self, id: usize) -> [usize; 2] {
        [id % self.nodes_per_axis, id / self.nodes_per_axis]
    }

    /// Horizontal position of a node as an `[x1, x2]` pair (x2 = 0 for n = 1).
    pub fn position(&self, node: [usize; 2]) -> [f64; 2] {
        let x1 = self.coord(node[0]);
        let x2 = if self.dim == 2 { self.coord(node[1]) } else { 0.0 };
        [x1, x2]
    }

    /// True when the node does not lie on the boundary of the box.
    pub fn is_interior(&self, node: [usize; 2]) -> bool {
        let n = self.nodes_per_axis;
        let inner0 = node[0] >= 1 && node[0] + 1 < n;
        if self.dim == 1 {
            inner0
        } else {
            inner0 && node[1] >= 1 && node[1] + 1 < n
        }
    }

    /// Node index closest to the physical point `x` (clamped to the box).
    pub fn nearest_node(&self, x: [f64; 2]) -> [usize; 2] {
        let clamp = |v: f64| -> usize {
            let i = ((v + self.half_width) / self.dx).round();
            i.clamp(0.0, (self.nodes_per_axis - 1) as f64) as usize
        };
        let iy = if self.dim == 2 { clamp(x[1]) } else { 0 };
        [clamp(x[0]), iy]
    }
}

/// Discrete scalar field: samples of u over a [`GridSpec`] plus a time stamp.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub spec: GridSpec,
    pub time: f64,
    pub values: Vec<f64>,
}

impl GridFunction {
    /// Samples `f(x1, x2)` at every node at time 0.
    pub fn from_fn(spec: GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(spec.node_count());
        for iy in 0..spec.nodes_axis1() {
            for ix in 0..spec.nodes_per_axis() {
                let [x1, x2] = spec.position([ix, iy]);
                values.push(f(x1, x2));
            }
        }
        Self {
            spec,
            time: 0.0,
            values,
        }
    }

    pub fn value(&self, node: [usize; 2]) -> f64 {
        self.values[self.spec.index(node[0], node[1])]
    }

    /// Embedded graph point (x1, x2, u) of a node; x2 = 0 for n = 1.
    pub fn graph_point(&self, node: [usize; 2]) -> [f64; 3] {
        let [x1, x2] = self.spec.position(node);
        [x1, x2, self.value(node)]
    }

    /// Errors with the first node holding a non-finite sample.
    pub fn check_finite(&self) -> Result<()> {
        for (id, v) in self.values.iter().enumerate() {
            if !v.is_finite() {
                return Err(FlowError::NonFinite {
                    node: self.spec.node_of(id),
                });
            }
        }
        Ok(())
    }
}

/// Euclidean norm of a 3-vector.
pub fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Difference of 3-vectors.
pub fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Dot product of 3-vectors.
pub fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
