//! Coupling sweeps and weak-coupling limit extraction.
//!
//! A sweep solves the ground-state problem once per coupling α and collects
//! diagnostics. The two limit laws are read off compensated sequences:
//!
//! * algebraic (p > d): `r(α) = α^{−p/(p−d)} λ(αV)` tends to a negative
//!   constant; the fit model is `r(α) = r₀ + c·α^s` with the correction
//!   exponent s chosen over a log grid by least squares (Aitken Δ² on the
//!   three smallest couplings as a fallback);
//! * exponential (p = d ≥ 2): `g(α) = α^{1/(d−1)} log(1/|λ(αV)|)` tends to
//!   a positive constant; the model is `g(α) = g₀ + c·α^{1/d}`, the
//!   correction shape that compactly supported comparison profiles
//!   produce.
//!
//! Minimizer shapes are compared through the scaling normalization
//! `f_α(x) = α^{−d/(p(p−d))} u_α(x α^{−1/(p−d)})`, which keeps `‖f_α‖_p = 1`
//! and turns the α → 0 family into a fixed profile. Fits report the
//! matching closed-form prediction and carry their raw compensated
//! sequences so callers can re-fit with their own models.
//!
//! Per-α solves are independent and run in parallel; records are sorted by
//! descending α afterward, so results do not depend on scheduling.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::closed_forms::{predicted_lambda_subcritical, predicted_log_rate_critical, Regime};
use crate::functional::Potential;
use crate::grid::{build_grid, Field, Grid, GridKind};
use crate::potential::PotentialDescriptor;
use crate::solver::{solve_lambda, sweep_grid_spec, GroundState, InitProfile, SolverConfig};
use crate::{Error, Result};

/// One solve of a sweep, with the full ground state attached (the final
/// grid and minimizer are needed for per-record bound checks and shape
/// comparisons).
#[derive(Debug, Clone)]
pub struct SweepRecord {
    pub alpha: f64,
    pub state: GroundState,
}

impl SweepRecord {
    pub fn lambda(&self) -> f64 {
        self.state.lambda
    }

    pub fn residual(&self) -> f64 {
        self.state.residual
    }

    pub fn converged(&self) -> bool {
        self.state.converged
    }

    /// `‖∇u_α‖_p`.
    pub fn grad_norm_p(&self) -> f64 {
        self.state.grad_norm_p()
    }

    /// `‖u_α‖_∞`.
    pub fn sup_u(&self) -> f64 {
        self.state.breakdown.sup_norm
    }

    pub fn domain_extent(&self) -> f64 {
        self.state.domain_extent
    }

    pub fn iterations(&self) -> usize {
        self.state.iterations
    }
}

/// Sweep output: records sorted by descending α.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub records: Vec<SweepRecord>,
    pub d: u32,
    pub p: f64,
}

impl SweepResult {
    /// Base-potential quadrature `I_h` from the record with the largest
    /// domain (the best-resolved integral); `None` for an empty sweep.
    pub fn integral(&self) -> Option<f64> {
        self.records
            .iter()
            .max_by(|a, b| a.state.domain_extent.total_cmp(&b.state.domain_extent))
            .map(|r| r.state.potential_integral)
    }

    /// `(α, λ)` of the converged records, in stored (descending-α) order.
    pub fn converged_pairs(&self) -> (Vec<f64>, Vec<f64>) {
        let mut alphas = Vec::new();
        let mut lambdas = Vec::new();
        for r in self.records.iter().filter(|r| r.converged()) {
            alphas.push(r.alpha);
            lambdas.push(r.lambda());
        }
        (alphas, lambdas)
    }
}

/// Inclusive geometric grid from `lo` to `hi` with `n` points; both
/// endpoints are exact.
pub fn alpha_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0) || !(hi > lo) || !hi.is_finite() {
        return Err(Error::Config(format!("coupling range needs 0 < lo < hi, got [{lo}, {hi}]")));
    }
    if n < 2 {
        return Err(Error::Config(format!("a coupling grid needs at least two points, got {n}")));
    }
    let ratio = hi / lo;
    let mut out: Vec<f64> = (0..n).map(|k| lo * ratio.powf(k as f64 / (n - 1) as f64)).collect();
    out[0] = lo;
    *out.last_mut().expect("n >= 2") = hi;
    Ok(out)
}

/// Solves λ(αV) for every coupling in `alphas` (in parallel; the records
/// come back sorted by descending α and are identical for any execution
/// order). Non-convergence is recorded in-band, not an error. An empty
/// coupling list yields an empty result.
pub fn sweep(
    descriptor: &PotentialDescriptor,
    d: u32,
    p: f64,
    alphas: &[f64],
    config: &SolverConfig,
) -> Result<SweepResult> {
    if alphas.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
        return Err(Error::Config("couplings must be positive and finite".into()));
    }
    let mut sorted = alphas.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Usage("duplicate couplings in the sweep grid".into()));
    }
    if matches!(config.init, InitProfile::Nodal(_)) {
        return Err(Error::Usage("sweeps size a fresh grid per coupling; nodal initializers cannot apply".into()));
    }
    let mut cfg = config.clone();
    cfg.p = p;
    cfg.validate()?;
    let mut records: Vec<SweepRecord> = alphas
        .par_iter()
        .map(|&alpha| -> Result<SweepRecord> {
            let spec = sweep_grid_spec(descriptor, d, p, alpha, &cfg)?;
            let grid = Arc::new(build_grid(spec)?);
            let pot = Potential::sample(descriptor, grid)?.scaled(alpha)?;
            let state = solve_lambda(&pot, &cfg)?;
            Ok(SweepRecord { alpha, state })
        })
        .collect::<Result<Vec<_>>>()?;
    records.sort_by(|a, b| b.alpha.total_cmp(&a.alpha));
    Ok(SweepResult { records, d, p })
}

/// A fitted limit law with its closed-form prediction.
///
/// When the least-squares step degenerates and the Aitken fallback is used,
/// `correction`, `correction_exponent`, and `rms` are reported as 0.
#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub regime: Regime,
    /// Fitted limit of the compensated sequence (r₀ or g₀).
    pub limit: f64,
    /// Coefficient of the correction term.
    pub correction: f64,
    /// Exponent s of the correction term α^s.
    pub correction_exponent: f64,
    /// Closed-form limit for the given `I_h`.
    pub prediction: f64,
    /// `|limit − prediction| / |prediction|`.
    pub relative_error: f64,
    /// Root-mean-square residual of the model on the compensated data.
    pub rms: f64,
    /// Couplings the model was actually fitted on.
    pub alphas: Vec<f64>,
    /// The compensated sequence the model was fitted to.
    pub compensated: Vec<f64>,
}

/// Least squares for `y ≈ a + b·x`; `None` when the design is degenerate.
fn two_basis_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sy: f64 = ys.iter().sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let det = n * sxx - sx * sx;
    if !(det > f64::EPSILON * n * sxx) {
        return None;
    }
    let a = (sy * sxx - sx * sxy) / det;
    let b = (n * sxy - sx * sy) / det;
    let mut sse = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let r = y - a - b * x;
        sse += r * r;
    }
    let out = (a, b, (sse / n).sqrt());
    if out.0.is_finite() && out.1.is_finite() {
        Some(out)
    } else {
        None
    }
}

/// Aitken Δ² on the three values at the smallest couplings.
fn aitken_limit(alphas: &[f64], values: &[f64]) -> Option<f64> {
    let mut idx: Vec<usize> = (0..alphas.len()).collect();
    idx.sort_by(|&i, &j| alphas[i].total_cmp(&alphas[j]));
    let (x0, x1, x2) = (values[idx[2]], values[idx[1]], values[idx[0]]);
    let d2 = (x2 - x1) - (x1 - x0);
    if d2 == 0.0 || !d2.is_finite() {
        return None;
    }
    let lim = x2 - (x2 - x1) * (x2 - x1) / d2;
    lim.is_finite().then_some(lim)
}

fn check_fit_inputs(alphas: &[f64], lambdas: &[f64]) -> Result<()> {
    if alphas.len() != lambdas.len() {
        return Err(Error::Usage(format!(
            "{} couplings against {} eigenvalues",
            alphas.len(),
            lambdas.len()
        )));
    }
    if alphas.len() < 3 {
        return Err(Error::Usage(format!("a limit fit needs at least 3 points, got {}", alphas.len())));
    }
    if alphas.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
        return Err(Error::Config("couplings must be positive and finite".into()));
    }
    if lambdas.iter().any(|l| !l.is_finite()) {
        return Err(Error::Data("eigenvalue sequence contains a non-finite value".into()));
    }
    Ok(())
}

/// Extracts the algebraic-regime limit `r₀ = lim α^{−p/(p−d)} λ(αV)` and
/// compares it against the closed-form prediction at integral `i_h`.
///
/// The `r₀ + c·α^s` model is fitted on the small-coupling half of the sweep
/// (at least 4 points): it describes the approach to the limit, and points
/// far from it would bias the intercept.
pub fn fit_subcritical(alphas: &[f64], lambdas: &[f64], d: u32, p: f64, i_h: f64) -> Result<FitResult> {
    if !(p > d as f64) {
        return Err(Error::Config(format!("the algebraic regime needs p > d, got d = {d}, p = {p}")));
    }
    check_fit_inputs(alphas, lambdas)?;
    let expo = p / (p - d as f64);

    // a single-power correction only describes the far end of the sweep, so
    // restrict the fit to the small-coupling half (at least 4 points) —
    // mid-range couplings carry higher-order terms that drag the intercept
    let mut order: Vec<usize> = (0..alphas.len()).collect();
    order.sort_by(|&i, &j| alphas[i].total_cmp(&alphas[j]));
    order.truncate(alphas.len().div_ceil(2).max(4).min(alphas.len()));
    let win_a: Vec<f64> = order.iter().map(|&i| alphas[i]).collect();
    let r: Vec<f64> = order.iter().map(|&i| lambdas[i] * alphas[i].powf(-expo)).collect();
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("compensated sequence overflowed; couplings span too many scales".into()));
    }

    // correction exponent: scan a log grid, then refine the winning bracket
    let fit_at = |s: f64| -> Option<(f64, f64, f64)> {
        let xs: Vec<f64> = win_a.iter().map(|a| a.powf(s)).collect();
        two_basis_fit(&xs, &r)
    };
    let s_grid: Vec<f64> = (0..48).map(|k| 0.05 * (3.0f64 / 0.05).powf(k as f64 / 47.0)).collect();
    let mut best: Option<(usize, f64, f64, f64)> = None;
    for (k, &s) in s_grid.iter().enumerate() {
        if let Some((a, b, rms)) = fit_at(s) {
            if best.map_or(true, |(.., brms)| rms < brms) {
                best = Some((k, a, b, rms));
            }
        }
    }
    let (limit, correction, correction_exponent, rms) = match best {
        Some((k, ..)) => {
            // golden-section on log s between the neighbors of the winner
            let rms_of = |s: f64| fit_at(s).map_or(f64::INFINITY, |(.., rms)| rms);
            let mut lo = s_grid[k.saturating_sub(1)].ln();
            let mut hi = s_grid[(k + 1).min(s_grid.len() - 1)].ln();
            const INV_PHI: f64 = 0.618_033_988_749_894_9;
            let mut m1 = hi - INV_PHI * (hi - lo);
            let mut m2 = lo + INV_PHI * (hi - lo);
            let (mut f1, mut f2) = (rms_of(m1.exp()), rms_of(m2.exp()));
            for _ in 0..48 {
                if f1 <= f2 {
                    hi = m2;
                    m2 = m1;
                    f2 = f1;
                    m1 = hi - INV_PHI * (hi - lo);
                    f1 = rms_of(m1.exp());
                } else {
                    lo = m1;
                    m1 = m2;
                    f1 = f2;
                    m2 = lo + INV_PHI * (hi - lo);
                    f2 = rms_of(m2.exp());
                }
            }
            let s = (0.5 * (lo + hi)).exp();
            let (a, b, rms) = fit_at(s).unwrap_or_else(|| {
                let (_, a, b, rms) = best.expect("winner exists");
                (a, b, rms)
            });
            (a, b, s, rms)
        }
        None => {
            let lim = aitken_limit(&win_a, &r)
                .ok_or_else(|| Error::Numerics("limit extrapolation degenerated".into()))?;
            (lim, 0.0, 0.0, 0.0)
        }
    };
    let prediction = predicted_lambda_subcritical(1.0, d, p, i_h)?;
    Ok(FitResult {
        regime: Regime::Subcritical,
        limit,
        correction,
        correction_exponent,
        prediction,
        relative_error: (limit - prediction).abs() / prediction.abs(),
        rms,
        alphas: win_a,
        compensated: r,
    })
}

/// Extracts the exponential-regime limit
/// `g₀ = lim α^{1/(d−1)} log(1/|λ(αV)|)` with the `α^{1/d}` correction
/// model, and compares against the closed-form rate at integral `i_h`.
pub fn fit_critical(alphas: &[f64], lambdas: &[f64], d: u32, i_h: f64) -> Result<FitResult> {
    if d < 2 {
        return Err(Error::Config(format!("the exponential regime needs d >= 2, got d = {d}")));
    }
    check_fit_inputs(alphas, lambdas)?;
    if let Some(bad) = lambdas.iter().position(|l| *l >= 0.0) {
        return Err(Error::Data(format!(
            "eigenvalue {} at coupling {} is not negative; the exponential law is undefined there",
            lambdas[bad], alphas[bad]
        )));
    }
    let df = d as f64;
    let g: Vec<f64> = alphas
        .iter()
        .zip(lambdas)
        .map(|(a, l)| a.powf(1.0 / (df - 1.0)) * -(-l).ln())
        .collect();
    let correction_exponent = 1.0 / df;
    let xs: Vec<f64> = alphas.iter().map(|a| a.powf(correction_exponent)).collect();
    let (limit, correction, rms) = match two_basis_fit(&xs, &g) {
        Some(v) => v,
        None => {
            let lim = aitken_limit(alphas, &g)
                .ok_or_else(|| Error::Numerics("limit extrapolation degenerated".into()))?;
            (lim, 0.0, 0.0)
        }
    };
    let prediction = predicted_log_rate_critical(d, i_h)?;
    Ok(FitResult {
        regime: Regime::Critical,
        limit,
        correction,
        correction_exponent,
        prediction,
        relative_error: (limit - prediction).abs() / prediction.abs(),
        rms,
        alphas: alphas.to_vec(),
        compensated: g,
    })
}

/// Diagnostic quantity whose log-log slope against α has a known exponent
/// for p > d.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepQuantity {
    /// `‖∇u_α‖_p ~ α^{1/(p−d)}`.
    GradNorm,
    /// `‖u_α‖_∞^p ~ α^{d/(p−d)}`.
    SupNormP,
}

/// Least-squares slope of `log(quantity)` against `log α` over the
/// converged records.
pub fn exponent_regression(records: &[SweepRecord], quantity: SweepQuantity) -> Result<f64> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for r in records.iter().filter(|r| r.converged()) {
        let p = r.state.p;
        let d = r.state.field.grid().spec.d as f64;
        if !(p > d) {
            return Err(Error::Config(format!("a-priori exponents hold for p > d, got d = {d}, p = {p}")));
        }
        let q = match quantity {
            SweepQuantity::GradNorm => r.grad_norm_p(),
            SweepQuantity::SupNormP => r.sup_u().powf(p),
        };
        if !(q > 0.0) {
            return Err(Error::Data(format!("nonpositive diagnostic {q} at coupling {}", r.alpha)));
        }
        xs.push(r.alpha.ln());
        ys.push(q.ln());
    }
    if xs.len() < 2 {
        return Err(Error::Usage(format!("slope regression needs at least 2 converged records, got {}", xs.len())));
    }
    let (_, slope, _) =
        two_basis_fit(&xs, &ys).ok_or_else(|| Error::Numerics("degenerate regression design".into()))?;
    Ok(slope)
}

/// The scaling-normalized minimizer
/// `f_α(x) = α^{−d/(p(p−d))} u_α(x α^{−1/(p−d)})` resampled onto a
/// reference grid; `‖f_α‖_p = 1` in the continuum, so the quadrature norm
/// matches to resampling accuracy. Coupling α is the one recorded in the
/// state.
pub fn rescale_minimizer(state: &GroundState, reference: Arc<Grid>) -> Result<Field> {
    let d = state.field.grid().spec.d;
    let p = state.p;
    if !(p > d as f64) {
        return Err(Error::Config(format!("minimizer rescaling needs p > d, got d = {d}, p = {p}")));
    }
    if reference.spec.d != d {
        return Err(Error::Usage(format!(
            "reference grid dimension {} does not match the state dimension {d}",
            reference.spec.d
        )));
    }
    if reference.spec.kind == GridKind::LogRadius {
        return Err(Error::Usage("rescaling needs a physical reference grid".into()));
    }
    let alpha = state.coupling;
    let df = d as f64;
    let amp = alpha.powf(-df / (p * (p - df)));
    let stretch = alpha.powf(-1.0 / (p - df));
    Field::from_fn(reference, |y| amp * state.field.interpolate(y * stretch))
}

/// Shape distance after translation alignment: both fields are shifted so
/// their maxima coincide, then `‖f − g‖_p + max_i |f_i − g_i|` is returned.
/// Fields must share a grid.
pub fn minimizer_distance(f: &Field, reference: &Field, p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::Config(format!("exponent must satisfy p > 1, got {p}")));
    }
    let g = f.grid();
    if g.spec != reference.grid().spec || g.len() != reference.grid().len() {
        return Err(Error::Usage("distance needs both fields on one grid".into()));
    }
    let argmax = |v: &[f64]| {
        v.iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(i, _)| i)
            .unwrap_or(0)
    };
    let shift = g.nodes[argmax(f.values())] - g.nodes[argmax(reference.values())];
    let mut mass = 0.0;
    let mut sup = 0.0f64;
    for i in 0..g.len() {
        let fv = if shift == 0.0 { f.values()[i] } else { f.interpolate(g.nodes[i] + shift) };
        let diff = (fv - reference.values()[i]).abs();
        mass += g.weights[i] * diff.powf(p);
        sup = sup.max(diff);
    }
    Ok(mass.powf(1.0 / p) + sup)
}

/// Flatness of a p = d state inside the ball of radius ρ: rescales so
/// `u(ρ) = 1` and returns `sup_{|x| ≤ ρ} (u^d − 1)`. Small values mean the
/// minimizer is nearly constant where the potential lives — the mechanism
/// behind the exponential law.
pub fn oscillation_diagnostic(state: &GroundState, rho: f64) -> Result<f64> {
    let g = state.field.grid();
    let d = g.spec.d;
    if state.p != d as f64 {
        return Err(Error::Config(format!("the flatness diagnostic needs p = d, got p = {}, d = {d}", state.p)));
    }
    if g.spec.kind == GridKind::Line {
        return Err(Error::Usage("the flatness diagnostic needs a radial state".into()));
    }
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::Config(format!("radius must be positive, got {rho}")));
    }
    let coord = match g.spec.kind {
        GridKind::Radial => rho,
        GridKind::LogRadius => rho.ln(),
        GridKind::Line => unreachable!(),
    };
    let c = state.field.interpolate(coord);
    if !(c > 0.0) {
        return Err(Error::Data(format!("state vanishes at radius {rho}; cannot normalize")));
    }
    // the closed ball includes ρ itself, where the normalized value is 1
    let mut sup = 0.0f64;
    for i in 0..g.len() {
        if g.radius(i) <= rho {
            sup = sup.max((state.field.values()[i] / c).powi(d as i32) - 1.0);
        }
    }
    Ok(sup)
}
