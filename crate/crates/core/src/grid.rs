//! Uniform grids, trapezoid quadrature, and staggered first differences.
//!
//! Three kinds of grid cover the geometries the energy is posed on:
//!
//! * `Line` — symmetric interval `[−L, L]` for d = 1, with a node exactly at
//!   the origin (requested node counts are rounded up to odd);
//! * `Radial` — `[0, L]` with the measure density `ω_d r^{d−1}`; the r = 0
//!   node is a natural (Neumann) boundary and carries zero quadrature weight
//!   for d ≥ 2;
//! * `LogRadius` — `t = log r ∈ [t_min, log L]`, used for p = d runs, where
//!   the radial Dirichlet integrand collapses to a uniform one:
//!   `∫ |u'(r)|^d ω_d r^{d−1} dr = ω_d ∫ |du/dt|^d dt`. Mass-type integrals
//!   push forward to the weight `ω_d e^{dt} dt`; the innermost node also
//!   absorbs the measure of the ball `r < e^{t_min}` (the minimizer is
//!   extended constant inward there).
//!
//! Nodal `weights` discretize `∫ · dx` by the trapezoid rule; `mid_weights`
//! carry the measure of each cell at its midpoint so that the Dirichlet term
//! is `Σ_cells mid_weight · |Δu/h|^p`. On `LogRadius` grids that sum equals
//! the physical Dirichlet energy only for p = d, which is the only exponent
//! the solver uses them for.
//!
//! The outermost node of every grid (both ends for `Line`) is a homogeneous
//! Dirichlet boundary; fields are expected to vanish there and descent never
//! moves those entries.

use std::sync::Arc;

use crate::closed_forms::unit_sphere_area;
use crate::{Error, Result};

/// Geometry of a grid. See the module docs for the three kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Line,
    Radial,
    LogRadius,
}

/// Requested grid: dimension, kind, node count, and extent.
///
/// `extent` is the half-width for `Line` and the outer radius for `Radial`
/// and `LogRadius` (whose nodes run over `t ∈ [t_min, log extent]`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub d: u32,
    pub kind: GridKind,
    pub n: usize,
    pub extent: f64,
    /// Inner log-radius; ignored by `Line` and `Radial`.
    pub t_min: f64,
}

/// Weight magnitudes on log-radius grids reach `e^{d·t_max}`; beyond this
/// bound (and its mirror at `t_min`) products like `w·|u|^p` leave the
/// normal f64 range and the energy terms lose meaning.
pub const LOG_WEIGHT_EXPONENT_LIMIT: f64 = 600.0;

impl GridSpec {
    pub fn line(n: usize, half_width: f64) -> Self {
        GridSpec { d: 1, kind: GridKind::Line, n, extent: half_width, t_min: 0.0 }
    }

    pub fn radial(d: u32, n: usize, radius: f64) -> Self {
        GridSpec { d, kind: GridKind::Radial, n, extent: radius, t_min: 0.0 }
    }

    pub fn log_radius(d: u32, n: usize, t_min: f64, radius: f64) -> Self {
        GridSpec { d, kind: GridKind::LogRadius, n, extent: radius, t_min }
    }
}

/// A built grid: node coordinates, quadrature weights, and cell measures.
///
/// `nodes` hold the native coordinate (x, r, or t = log r). All spacings are
/// uniform; `spacing` is the shared `h`. `origin` is the node where point
/// couplings act: the x = 0 node on lines, the innermost node otherwise.
#[derive(Debug)]
pub struct Grid {
    pub spec: GridSpec,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub mid_weights: Vec<f64>,
    pub spacing: f64,
    pub origin: usize,
}

/// Builds the grid described by `spec`.
///
/// Fails with a configuration error on non-finite or non-positive extents,
/// node counts below 16, kind/dimension mismatches (lines are d = 1,
/// log-radius needs d ≥ 2), and log ranges that would overflow the weights.
pub fn build_grid(spec: GridSpec) -> Result<Grid> {
    if !spec.extent.is_finite() || spec.extent <= 0.0 {
        return Err(Error::Config(format!("grid extent must be positive, got {}", spec.extent)));
    }
    if spec.n < 16 {
        return Err(Error::Config(format!("grid needs at least 16 nodes, got {}", spec.n)));
    }
    if spec.d == 0 {
        return Err(Error::Config("dimension must be at least 1".into()));
    }
    match spec.kind {
        GridKind::Line => build_line(spec),
        GridKind::Radial => build_radial(spec),
        GridKind::LogRadius => build_log_radius(spec),
    }
}

fn build_line(mut spec: GridSpec) -> Result<Grid> {
    if spec.d != 1 {
        return Err(Error::Config(format!("line grids are one-dimensional, got d = {}", spec.d)));
    }
    // A node exactly at x = 0 needs an odd count; round up rather than reject.
    if spec.n % 2 == 0 {
        spec.n += 1;
    }
    let half = (spec.n - 1) / 2;
    let h = spec.extent / half as f64;
    let nodes: Vec<f64> = (0..spec.n).map(|i| (i as f64 - half as f64) * h).collect();
    let mut weights = vec![h; spec.n];
    weights[0] = 0.5 * h;
    weights[spec.n - 1] = 0.5 * h;
    let mid_weights = vec![h; spec.n - 1];
    Ok(Grid { origin: half, spec, nodes, weights, mid_weights, spacing: h })
}

fn build_radial(spec: GridSpec) -> Result<Grid> {
    let n = spec.n;
    let h = spec.extent / (n - 1) as f64;
    let area = unit_sphere_area(spec.d);
    let dm1 = (spec.d - 1) as i32;
    let nodes: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
    let weights: Vec<f64> = nodes
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let tau = if i == 0 || i == n - 1 { 0.5 * h } else { h };
            area * r.powi(dm1) * tau
        })
        .collect();
    let mid_weights: Vec<f64> =
        (0..n - 1).map(|i| area * (0.5 * (nodes[i] + nodes[i + 1])).powi(dm1) * h).collect();
    Ok(Grid { spec, nodes, weights, mid_weights, spacing: h, origin: 0 })
}

fn build_log_radius(spec: GridSpec) -> Result<Grid> {
    if spec.d < 2 {
        return Err(Error::Config("log-radius grids need d >= 2".into()));
    }
    let t_max = spec.extent.ln();
    if !spec.t_min.is_finite() || spec.t_min >= t_max {
        return Err(Error::Config(format!(
            "log-radius range is empty: t_min = {} vs log extent = {t_max}",
            spec.t_min
        )));
    }
    let d = spec.d as f64;
    if d * t_max > LOG_WEIGHT_EXPONENT_LIMIT || d * spec.t_min < -LOG_WEIGHT_EXPONENT_LIMIT {
        return Err(Error::Config(format!(
            "log-radius weights overflow: |d·t| exceeds {LOG_WEIGHT_EXPONENT_LIMIT}"
        )));
    }
    let n = spec.n;
    let h = (t_max - spec.t_min) / (n - 1) as f64;
    let area = unit_sphere_area(spec.d);
    let nodes: Vec<f64> = (0..n)
        .map(|i| {
            let s = i as f64 / (n - 1) as f64;
            spec.t_min * (1.0 - s) + t_max * s
        })
        .collect();
    let mut weights: Vec<f64> = nodes
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let tau = if i == 0 || i == n - 1 { 0.5 * h } else { h };
            area * (d * t).exp() * tau
        })
        .collect();
    // Ball r < e^{t_min}: the Neumann condition continues fields as constants
    // into it, so its measure belongs to the innermost node.
    weights[0] += area * (d * spec.t_min).exp() / d;
    let mid_weights = vec![area * h; n - 1];
    Ok(Grid { spec, nodes, weights, mid_weights, spacing: h, origin: 0 })
}

impl Grid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Whether node `i` is pinned to zero by the boundary conditions.
    pub fn is_dirichlet(&self, i: usize) -> bool {
        match self.spec.kind {
            GridKind::Line => i == 0 || i == self.len() - 1,
            GridKind::Radial | GridKind::LogRadius => i == self.len() - 1,
        }
    }

    /// Physical radius |x| of node `i` (exponentiates log-radius nodes).
    pub fn radius(&self, i: usize) -> f64 {
        match self.spec.kind {
            GridKind::Line => self.nodes[i].abs(),
            GridKind::Radial => self.nodes[i],
            GridKind::LogRadius => self.nodes[i].exp(),
        }
    }

    /// Nodes strictly between the boundaries.
    pub fn interior(&self) -> std::ops::Range<usize> {
        match self.spec.kind {
            GridKind::Line => 1..self.len() - 1,
            // r = 0 / t_min is a free Neumann node, but its weight can vanish
            // (d ≥ 2), so residual norms treat it like the boundary.
            GridKind::Radial | GridKind::LogRadius => 1..self.len() - 1,
        }
    }
}

/// Trapezoid quadrature of nodal `samples` against the grid's measure.
pub fn quadrature(grid: &Grid, samples: &[f64]) -> Result<f64> {
    if samples.len() != grid.len() {
        return Err(Error::Usage(format!(
            "quadrature got {} samples on a {}-node grid",
            samples.len(),
            grid.len()
        )));
    }
    Ok(grid.weights.iter().zip(samples).map(|(w, s)| w * s).sum())
}

/// Staggered gradient magnitudes `|u_{i+1} − u_i| / h`, one per cell.
///
/// The companion cell measures are `grid.mid_weights`, so
/// `Σ mid_weights[j] · g[j]^p` is the discrete Dirichlet energy.
pub fn gradient_magnitudes(grid: &Grid, field: &Field) -> Vec<f64> {
    let u = field.values();
    let inv_h = 1.0 / grid.spacing;
    (0..grid.len() - 1).map(|i| (u[i + 1] - u[i]).abs() * inv_h).collect()
}

/// Nodal values of a function on a grid (shared via `Arc`).
#[derive(Debug, Clone)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl Field {
    /// Wraps nodal values; rejects length mismatches and non-finite entries.
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Field> {
        if values.len() != grid.len() {
            return Err(Error::Usage(format!(
                "field has {} values on a {}-node grid",
                values.len(),
                grid.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Data(format!("field contains a non-finite value {bad}")));
        }
        Ok(Field { grid, values })
    }

    /// Samples `f` at the native node coordinates (x, r, or t).
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64) -> f64) -> Result<Field> {
        let values = grid.nodes.iter().map(|&x| f(x)).collect();
        Field::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Linear interpolation at coordinate `x` (native coordinate of the
    /// grid). Beyond the Dirichlet boundary the field is 0; inside the
    /// Neumann boundary of radial/log grids it continues as a constant.
    pub fn interpolate(&self, x: f64) -> f64 {
        let nodes = &self.grid.nodes;
        let n = nodes.len();
        if x <= nodes[0] {
            return match self.grid.spec.kind {
                GridKind::Line => 0.0,
                GridKind::Radial | GridKind::LogRadius => self.values[0],
            };
        }
        if x >= nodes[n - 1] {
            return 0.0;
        }
        let s = (x - nodes[0]) / self.grid.spacing;
        let i = (s.floor() as usize).min(n - 2);
        let frac = (s - i as f64).clamp(0.0, 1.0);
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }
}
