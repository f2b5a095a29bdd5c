//! Discrete energy, gradient, and stationarity residual.
//!
//! For nodal values `u` on a grid with trapezoid weights `w`, midpoint
//! weights `mw`, and staggered slopes `s_j = (u_{j+1} − u_j)/h`, the
//! functional is
//!
//! ```text
//! Q[u] = Σ_j mw_j ψ(s_j)  −  Σ_i w_i V_i |u_i|^p  −  v |u_o|^p ,
//! ψ(s) = (s² + ε²)^{p/2}
//! ```
//!
//! where `v` is an optional point coupling at the origin node `o` and ε ≥ 0
//! smooths the kink of `|s|^p` (mandatory for p < 2, where the bare
//! p-Laplacian is degenerate; energies are always reported at ε = 0). On
//! log-radius grids the same sum is the radial p-Dirichlet energy only for
//! p = d — the solver enforces that pairing.
//!
//! The gradient is the exact derivative of the discrete sum, so descent
//! methods and finite-difference checks see one consistent object. The
//! stationarity residual measures `∇Q − p λ W |u|^{p−2}u` in the weighted
//! dual norm `(Σ r_i²/w_i)^{1/2}`, normalized by `p ‖u‖_p^{p−1}` to make it
//! scale-free.

use std::sync::Arc;

use serde::Serialize;

use crate::grid::{Field, Grid};
use crate::potential::PotentialDescriptor;
use crate::{Error, Result};

/// Fast paths for the exponents that dominate in practice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum PowKind {
    Two,
    Three,
    Four,
    Other,
}

#[inline]
pub(crate) fn pow_kind(p: f64) -> PowKind {
    if p == 2.0 {
        PowKind::Two
    } else if p == 3.0 {
        PowKind::Three
    } else if p == 4.0 {
        PowKind::Four
    } else {
        PowKind::Other
    }
}

#[inline]
pub(crate) fn pow_abs(x: f64, p: f64, k: PowKind) -> f64 {
    match k {
        PowKind::Two => x * x,
        PowKind::Three => {
            let a = x.abs();
            a * a * a
        }
        PowKind::Four => {
            let s = x * x;
            s * s
        }
        PowKind::Other => x.abs().powf(p),
    }
}

/// sign(x) |x|^{p−1}: derivative of |x|^p / p. Zero at x = 0 for every p > 1.
#[inline]
fn signed_pow_pm1(x: f64, p: f64, k: PowKind) -> f64 {
    match k {
        PowKind::Two => x,
        PowKind::Three => x * x.abs(),
        PowKind::Four => x * x * x,
        PowKind::Other => {
            if x == 0.0 {
                0.0
            } else {
                x.signum() * x.abs().powf(p - 1.0)
            }
        }
    }
}

#[inline]
fn psi(s: f64, p: f64, k: PowKind, eps2: f64) -> f64 {
    if eps2 == 0.0 {
        pow_abs(s, p, k)
    } else {
        (s * s + eps2).powf(0.5 * p)
    }
}

/// ψ'(s) = p s (s² + ε²)^{(p−2)/2}.
#[inline]
fn dpsi(s: f64, p: f64, k: PowKind, eps2: f64) -> f64 {
    if eps2 == 0.0 {
        match k {
            PowKind::Two => 2.0 * s,
            PowKind::Three => 3.0 * s * s.abs(),
            PowKind::Four => 4.0 * s * s * s,
            PowKind::Other => p * signed_pow_pm1(s, p, k),
        }
    } else if k == PowKind::Two {
        2.0 * s
    } else {
        p * s * (s * s + eps2).powf(0.5 * (p - 2.0))
    }
}

/// ψ''(s) = p (s² + ε²)^{(p−4)/2} ((p−1) s² + ε²) ≥ 0; the cell stiffness
/// density of the linearized operator.
#[inline]
pub(crate) fn d2psi(s: f64, p: f64, eps2: f64) -> f64 {
    if p == 2.0 {
        return 2.0;
    }
    if eps2 == 0.0 {
        if s == 0.0 {
            return 0.0;
        }
        return p * (p - 1.0) * s.abs().powf(p - 2.0);
    }
    let q = s * s + eps2;
    p * q.powf(0.5 * (p - 4.0)) * ((p - 1.0) * s * s + eps2)
}

/// A potential sampled on a grid, optionally with a point coupling `v ≥ 0`
/// at the origin node. The recorded `integral` is the quadrature of the
/// sampled values alone — the point channel is a separate object and never
/// counts toward `∫V`.
///
/// `scaled(α)` multiplies the whole object by a coupling constant and
/// remembers the accumulated factor, so `αV` is represented by one fixed
/// set of nodal values rather than an on-the-fly product — every consumer
/// of the same scaled potential sees bit-identical numbers.
#[derive(Debug, Clone)]
pub struct Potential {
    grid: Arc<Grid>,
    values: Vec<f64>,
    point_mass: f64,
    integral: f64,
    min_value: f64,
    coupling: f64,
    descriptor: Option<PotentialDescriptor>,
}

impl Potential {
    /// Samples a descriptor at every node (by physical radius).
    pub fn sample(descriptor: &PotentialDescriptor, grid: Arc<Grid>) -> Result<Potential> {
        let values: Vec<f64> = (0..grid.len()).map(|i| descriptor.value(grid.radius(i))).collect();
        let mut p = Potential::from_values(grid, values)?;
        p.descriptor = Some(descriptor.clone());
        Ok(p)
    }

    pub fn from_values(grid: Arc<Grid>, values: Vec<f64>) -> Result<Potential> {
        if values.len() != grid.len() {
            return Err(Error::Usage(format!(
                "potential has {} values on a {}-node grid",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("potential contains a non-finite sample".into()));
        }
        let integral = crate::grid::quadrature(&grid, &values)?;
        let min_value = values.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(Potential { grid, values, point_mass: 0.0, integral, min_value, coupling: 1.0, descriptor: None })
    }

    /// A pure point coupling `v δ_0` with no distributed part.
    pub fn point(grid: Arc<Grid>, v: f64) -> Result<Potential> {
        if !(v >= 0.0) {
            return Err(Error::Config(format!("point coupling must be nonnegative, got {v}")));
        }
        let n = grid.len();
        Ok(Potential {
            grid,
            values: vec![0.0; n],
            point_mass: v,
            integral: 0.0,
            min_value: 0.0,
            coupling: 1.0,
            descriptor: None,
        })
    }

    /// The potential multiplied by `alpha > 0`, with the accumulated
    /// coupling factor recorded. The descriptor (if any) keeps describing
    /// the *base* potential, so re-sampling reproduces the same scaling.
    pub fn scaled(&self, alpha: f64) -> Result<Potential> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Config(format!("coupling must be positive and finite, got {alpha}")));
        }
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= alpha;
        }
        out.point_mass = self.point_mass * alpha;
        out.integral = self.integral * alpha;
        out.min_value = self.min_value * alpha;
        out.coupling = self.coupling * alpha;
        Ok(out)
    }

    /// Re-samples onto another grid; only descriptor-backed and pure point
    /// potentials know their off-grid values. The coupling factor carries
    /// over.
    pub fn resample(&self, grid: Arc<Grid>) -> Result<Potential> {
        if let Some(desc) = &self.descriptor {
            return Potential::sample(desc, grid)?.scaled(self.coupling);
        }
        if self.values.iter().all(|&v| v == 0.0) {
            let mut p = Potential::point(grid, self.point_mass)?;
            p.coupling = self.coupling;
            return Ok(p);
        }
        Err(Error::Config("raw nodal potentials cannot be re-sampled; construct from a descriptor".into()))
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn point_mass(&self) -> f64 {
        self.point_mass
    }

    /// Quadrature of the sampled values, `I_h ≈ ∫V`.
    pub fn integral(&self) -> f64 {
        self.integral
    }

    pub fn min_value(&self) -> f64 {
        self.min_value
    }

    /// Accumulated multiplicative coupling (1 for an unscaled potential).
    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn descriptor(&self) -> Option<&PotentialDescriptor> {
        self.descriptor.as_ref()
    }
}

/// The pieces of `Q[u]` for one field, all at ε = 0.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnergyBreakdown {
    pub kinetic: f64,
    /// `Σ w V |u|^p + v |u_o|^p` — subtracted from the kinetic part.
    pub potential_term: f64,
    pub q_value: f64,
    /// `Σ w |u|^p = ‖u‖_p^p` (the point channel carries no mass).
    pub p_mass: f64,
    pub sup_norm: f64,
    /// `q_value / p_mass`; NaN for the zero field.
    pub rayleigh: f64,
}

pub fn norm_p(grid: &Grid, field: &Field, p: f64) -> f64 {
    debug_assert_eq!(grid.len(), field.values().len());
    let k = pow_kind(p);
    let mass: f64 = grid.weights.iter().zip(field.values()).map(|(w, u)| w * pow_abs(*u, p, k)).sum();
    mass.powf(1.0 / p)
}

/// `Σ_j mw_j |s_j|^p`, the unregularized p-Dirichlet sum.
pub fn dirichlet_energy(grid: &Grid, field: &Field, p: f64) -> f64 {
    debug_assert_eq!(grid.len(), field.values().len());
    let k = pow_kind(p);
    let u = field.values();
    let h = grid.spacing;
    let mut acc = 0.0;
    for j in 0..grid.len() - 1 {
        let s = (u[j + 1] - u[j]) / h;
        acc += grid.mid_weights[j] * pow_abs(s, p, k);
    }
    acc
}

fn check_same_grid(grid: &Arc<Grid>, field: &Field, potential: &Potential) -> Result<()> {
    let ok = |g: &Arc<Grid>| Arc::ptr_eq(g, grid) || (g.spec == grid.spec && g.len() == grid.len());
    if !ok(field.grid()) {
        return Err(Error::Usage("field lives on a different grid".into()));
    }
    if !ok(potential.grid()) {
        return Err(Error::Usage("potential was sampled on a different grid".into()));
    }
    Ok(())
}

/// Evaluates every component of `Q[u]` in two passes.
pub fn eval_q(grid: &Arc<Grid>, field: &Field, potential: &Potential, p: f64) -> Result<EnergyBreakdown> {
    if !(p > 1.0) {
        return Err(Error::Config(format!("exponent must satisfy p > 1, got {p}")));
    }
    check_same_grid(grid, field, potential)?;
    Ok(eval_q_eps(grid, field.values(), potential, p, 0.0))
}

pub(crate) fn eval_q_eps(grid: &Grid, u: &[f64], potential: &Potential, p: f64, eps: f64) -> EnergyBreakdown {
    let k = pow_kind(p);
    let eps2 = eps * eps;
    let h = grid.spacing;
    let mut kinetic = 0.0;
    for j in 0..u.len() - 1 {
        let s = (u[j + 1] - u[j]) / h;
        kinetic += grid.mid_weights[j] * psi(s, p, k, eps2);
    }
    let mut pot = 0.0;
    let mut mass = 0.0;
    let mut sup = 0.0f64;
    for i in 0..u.len() {
        let a = pow_abs(u[i], p, k);
        pot += grid.weights[i] * potential.values[i] * a;
        mass += grid.weights[i] * a;
        sup = sup.max(u[i].abs());
    }
    pot += potential.point_mass * pow_abs(u[grid.origin], p, k);
    let q_value = kinetic - pot;
    EnergyBreakdown { kinetic, potential_term: pot, q_value, p_mass: mass, sup_norm: sup, rayleigh: q_value / mass }
}

/// Exact gradient of the discrete functional. Dirichlet rows are zero.
///
/// ε must be positive for p < 2; for p ≥ 2, ε = 0 gives the bare
/// p-Laplacian stencil.
pub fn grad_q(grid: &Arc<Grid>, field: &Field, potential: &Potential, p: f64, epsilon: f64) -> Result<Field> {
    if !(p > 1.0) {
        return Err(Error::Config(format!("exponent must satisfy p > 1, got {p}")));
    }
    if !epsilon.is_finite() || epsilon < 0.0 {
        return Err(Error::Config(format!("smoothing must be finite and nonnegative, got {epsilon}")));
    }
    if p < 2.0 && epsilon == 0.0 {
        return Err(Error::Config("p < 2 needs a positive smoothing parameter (degenerate kink at zero slope)".into()));
    }
    check_same_grid(grid, field, potential)?;
    let mut out = vec![0.0; grid.len()];
    grad_q_into(grid, field.values(), potential, p, epsilon, &mut out);
    if out.iter().any(|g| !g.is_finite()) {
        return Err(Error::Numerics("gradient overflowed; rescale the field or raise the smoothing".into()));
    }
    Field::new(grid.clone(), out)
}

pub(crate) fn grad_q_into(grid: &Grid, u: &[f64], potential: &Potential, p: f64, eps: f64, out: &mut [f64]) {
    let k = pow_kind(p);
    let eps2 = eps * eps;
    let h = grid.spacing;
    let n = u.len();
    // flux through cell j, then difference back onto nodes
    let mut left_flux = 0.0; // mw_{i-1} ψ'(s_{i-1}) entering node i
    for i in 0..n {
        let right_flux = if i + 1 < n {
            grid.mid_weights[i] * dpsi((u[i + 1] - u[i]) / h, p, k, eps2)
        } else {
            0.0
        };
        let mut g = (left_flux - right_flux) / h;
        g -= p * grid.weights[i] * potential.values[i] * signed_pow_pm1(u[i], p, k);
        if i == grid.origin && potential.point_mass != 0.0 {
            g -= p * potential.point_mass * signed_pow_pm1(u[i], p, k);
        }
        out[i] = if grid.is_dirichlet(i) { 0.0 } else { g };
        left_flux = right_flux;
    }
}

/// Zeroes the Dirichlet nodes of `u` and scales it to unit p-norm in
/// place, returning the original norm; `None` when no p-mass remains (or
/// the mass is not finite). A field whose p-mass is already within 1e−12
/// of one is left untouched, so normalization is idempotent at the bit
/// level — re-normalizing an accepted iterate cannot drift its energy.
pub(crate) fn normalize_in_place(grid: &Grid, u: &mut [f64], p: f64) -> Option<f64> {
    let k = pow_kind(p);
    let n = u.len();
    if grid.is_dirichlet(0) {
        u[0] = 0.0;
    }
    if grid.is_dirichlet(n - 1) {
        u[n - 1] = 0.0;
    }
    let mass: f64 = grid.weights.iter().zip(u.iter()).map(|(w, x)| w * pow_abs(*x, p, k)).sum();
    if !(mass > 0.0) || !mass.is_finite() {
        return None;
    }
    let norm = mass.powf(1.0 / p);
    if (mass - 1.0).abs() > 1e-12 {
        let inv = 1.0 / norm;
        for x in u.iter_mut() {
            *x *= inv;
        }
    }
    Some(norm)
}

/// `p w_i |u_i|^{p−2} u_i`: gradient of the p-mass, Dirichlet rows zero.
pub(crate) fn mass_gradient_into(grid: &Grid, u: &[f64], p: f64, out: &mut [f64]) {
    let k = pow_kind(p);
    for i in 0..u.len() {
        out[i] = if grid.is_dirichlet(i) { 0.0 } else { p * grid.weights[i] * signed_pow_pm1(u[i], p, k) };
    }
}

/// `(Σ_interior r_i²/w_i)^{1/2}` over nodes with positive weight.
pub(crate) fn weighted_dual_norm(grid: &Grid, r: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in grid.interior() {
        let w = grid.weights[i];
        if w > 0.0 {
            acc += r[i] * r[i] / w;
        }
    }
    acc.sqrt()
}

/// Stationarity defect of `(u, λ)`: the weighted dual norm of
/// `∇Q − p λ W |u|^{p−2} u` over interior nodes, divided by `p ‖u‖_p^{p−1}`.
/// Returns 0 for the zero field.
///
/// For p < 2 the gradient is evaluated with ε equal to 1e−8 times the
/// largest slope magnitude, the scale below which slopes are numerically
/// indistinguishable from the kink.
pub fn el_residual(grid: &Arc<Grid>, field: &Field, potential: &Potential, p: f64, lambda: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::Config(format!("exponent must satisfy p > 1, got {p}")));
    }
    check_same_grid(grid, field, potential)?;
    let eps = if p < 2.0 {
        let u = field.values();
        let smax = (0..u.len() - 1).map(|j| ((u[j + 1] - u[j]) / grid.spacing).abs()).fold(0.0, f64::max);
        1e-8 * smax
    } else {
        0.0
    };
    Ok(el_residual_eps(grid, field.values(), potential, p, lambda, eps))
}

pub(crate) fn el_residual_eps(grid: &Grid, u: &[f64], potential: &Potential, p: f64, lambda: f64, eps: f64) -> f64 {
    let k = pow_kind(p);
    let mut grad = vec![0.0; u.len()];
    grad_q_into(grid, u, potential, p, eps, &mut grad);
    for i in 0..u.len() {
        if !grid.is_dirichlet(i) {
            grad[i] -= p * lambda * grid.weights[i] * signed_pow_pm1(u[i], p, k);
        }
    }
    let mass: f64 = grid.weights.iter().zip(u).map(|(w, x)| w * pow_abs(*x, p, k)).sum();
    if mass == 0.0 {
        return 0.0;
    }
    weighted_dual_norm(grid, &grad) / (p * mass.powf((p - 1.0) / p))
}
