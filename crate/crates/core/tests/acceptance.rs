//! Twelve numbered end-to-end checks of the library: sharp-constant
//! recovery, scaling laws, explicit-profile agreement, fitted weak-coupling
//! limits in both regimes, the Hardy threshold, structural monotonicity,
//! gradient correctness, an independent linear eigensolve oracle, certified
//! upper bounds, and a-priori exponent diagnostics.
//!
//! The target runs without the default test harness so that one
//! `CRITERION n: PASS/FAIL (detail)` line per check always reaches the
//! terminal; the process exits nonzero when any check fails. Oracles are
//! computed inside this file (closed forms, transcendental roots, a Sturm
//! bisection eigensolve) rather than taken from the library under test
//! wherever an independent route exists.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::{Duration, Instant};

use plap::asymptotics::{
    alpha_grid, exponent_regression, fit_critical, fit_subcritical, minimizer_distance, sweep,
    SweepQuantity, SweepResult,
};
use plap::closed_forms::{
    critical_cutoff_bound, explicit_minimizer_1d, sobolev_from_point_energy,
    subcritical_bump_bound,
};
use plap::functional::{el_residual, eval_q, grad_q, Potential};
use plap::grid::{build_grid, Field, Grid, GridSpec};
use plap::potential::PotentialDescriptor;
use plap::solver::{solve_lambda, solve_point_energy, sweep_grid_spec, SolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn main() {
    let fixtures = Fixtures::build();
    let checks: [(u32, Box<dyn Fn(&Fixtures) -> Outcome>); 12] = [
        (1, Box::new(|_| sharp_constant_1d())),
        (2, Box::new(|_| point_energy_scaling())),
        (3, Box::new(|_| explicit_profile())),
        (4, Box::new(subcritical_limits)),
        (5, Box::new(signed_potential_limit)),
        (6, Box::new(critical_limit)),
        (7, Box::new(|_| hardy_threshold())),
        (8, Box::new(ratio_monotonicity)),
        (9, Box::new(|_| gradient_check())),
        (10, Box::new(|_| linear_oracle())),
        (11, Box::new(certified_upper_bounds)),
        (12, Box::new(apriori_exponents)),
    ];
    let mut failures = 0;
    for (n, check) in &checks {
        let started = Instant::now();
        let outcome = check(&fixtures);
        eprintln!("[{:7.1} s] criterion {n} evaluated", started.elapsed().as_secs_f64());
        match outcome {
            Ok(detail) => println!("CRITERION {n}: PASS ({detail})"),
            Err(detail) => {
                failures += 1;
                println!("CRITERION {n}: FAIL ({detail})");
            }
        }
    }
    println!("acceptance: {} of 12 criteria passed", 12 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}

fn budget(elapsed: Duration, seconds: f64) -> Result<(), String> {
    if elapsed.as_secs_f64() > seconds {
        return Err(format!("runtime {:.1} s exceeds the {seconds:.0} s budget", elapsed.as_secs_f64()));
    }
    Ok(())
}

// ---------------------------------------------------------------- fixtures

/// A completed coupling sweep shared between several criteria.
struct Fixture {
    name: &'static str,
    descriptor: PotentialDescriptor,
    p: f64,
    result: SweepResult,
    /// Measured base-potential quadrature integral.
    i_h: f64,
    elapsed: Duration,
}

struct Fixtures {
    /// d = 1, p = 2, unit-integral Gaussian.
    subcritical_1d: Result<Fixture, String>,
    /// d = 1, p = 3, the same Gaussian.
    cubic_1d: Result<Fixture, String>,
    /// d = 2, p = 2, unit-integral planar Gaussian (exponential regime).
    critical_2d: Result<Fixture, String>,
    /// d = 1, p = 2, sign-changing mix with ∫V = 1/2.
    signed_mix: Result<Fixture, String>,
}

impl Fixtures {
    fn build() -> Fixtures {
        // A = 1/√(2π): unit integral in one dimension.
        let line_gaussian = PotentialDescriptor::Gaussian { amplitude: 0.3989422804014327, width: 1.0 };
        // A = 1/(2π): unit integral in two dimensions.
        let planar_gaussian =
            PotentialDescriptor::Gaussian { amplitude: 0.15915494309189535, width: 1.0 };
        // √(2π)(a1 s1 − a2 s2) = 1/2 with a genuinely negative part.
        let mix =
            PotentialDescriptor::Mix { a1: 1.0, s1: 1.0, a2: 0.4002644298996418, s2: 2.0 };
        Fixtures {
            subcritical_1d: run_sweep("1d gaussian p=2", line_gaussian.clone(), 1, 2.0, 1e-3, 0.3, 12),
            cubic_1d: run_sweep("1d gaussian p=3", line_gaussian, 1, 3.0, 1e-3, 0.3, 12),
            critical_2d: run_sweep("2d gaussian p=d", planar_gaussian, 2, 2.0, 0.05, 0.8, 10),
            signed_mix: run_sweep("1d signed mix", mix, 1, 2.0, 1e-3, 0.3, 12),
        }
    }

    fn all(&self) -> [&Result<Fixture, String>; 4] {
        [&self.subcritical_1d, &self.cubic_1d, &self.critical_2d, &self.signed_mix]
    }
}

fn run_sweep(
    name: &'static str,
    descriptor: PotentialDescriptor,
    d: u32,
    p: f64,
    lo: f64,
    hi: f64,
    count: usize,
) -> Result<Fixture, String> {
    let start = Instant::now();
    let alphas = alpha_grid(lo, hi, count).map_err(|e| format!("{name}: {e}"))?;
    let config = SolverConfig { p, ..SolverConfig::default() };
    let result = sweep(&descriptor, d, p, &alphas, &config).map_err(|e| format!("{name}: {e}"))?;
    let i_h = result.integral().ok_or_else(|| format!("{name}: empty sweep"))?;
    eprintln!("[{:7.1} s] sweep fixture \"{name}\" solved", start.elapsed().as_secs_f64());
    Ok(Fixture { name, descriptor, p, result, i_h, elapsed: start.elapsed() })
}

// --------------------------------------------------------------- criteria

/// 1. The numeric interpolation constant at d = 1, via the point-coupling
/// solve at N = 8192 and the closed-form inversion, matches S_{1,p} = p/2
/// within 1% for p in {1.5, 2, 3, 4}.
fn sharp_constant_1d() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for p in [1.5, 2.0, 3.0, 4.0] {
        let config = SolverConfig { grid_n: 8193, ..SolverConfig::default() };
        let (e1, _) = solve_point_energy(1.0, 1, p, &config).map_err(|e| format!("p = {p}: {e}"))?;
        let s = sobolev_from_point_energy(1, p, e1).map_err(|e| format!("p = {p}: {e}"))?;
        let rel = (s - 0.5 * p).abs() / (0.5 * p);
        worst = worst.max(rel);
        if rel > 0.01 {
            return Err(format!("numeric S at p = {p} is {s:.6}, {:.2}% from p/2", 100.0 * rel));
        }
    }
    let elapsed = start.elapsed();
    budget(elapsed, 30.0)?;
    Ok(format!(
        "numeric S within {:.3}% of p/2 for p in {{1.5, 2, 3, 4}} at N = 8192; {:.1} s",
        100.0 * worst,
        elapsed.as_secs_f64()
    ))
}

/// 2. Homogeneity of the point-coupling energy: E(2)/E(1) = 2^{p/(p−d)}
/// within 0.5% at (d, p) in {(1,2), (1,3), (2,3)}.
fn point_energy_scaling() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for (d, p) in [(1u32, 2.0f64), (1, 3.0), (2, 3.0)] {
        let config = SolverConfig::default();
        let (e1, _) =
            solve_point_energy(1.0, d, p, &config).map_err(|e| format!("(d, p) = ({d}, {p}), v = 1: {e}"))?;
        let (e2, _) =
            solve_point_energy(2.0, d, p, &config).map_err(|e| format!("(d, p) = ({d}, {p}), v = 2: {e}"))?;
        let exact = 2f64.powf(p / (p - d as f64));
        let rel = (e2 / e1 - exact).abs() / exact;
        worst = worst.max(rel);
        if rel > 0.005 {
            return Err(format!(
                "E(2)/E(1) at (d, p) = ({d}, {p}) is {:.6} vs 2^{{p/(p−d)}} = {exact:.6} ({:.3}%)",
                e2 / e1,
                100.0 * rel
            ));
        }
    }
    let elapsed = start.elapsed();
    budget(elapsed, 60.0)?;
    Ok(format!(
        "E(2)/E(1) matches 2^{{p/(p−d)}} within {:.3}% over three (d, p) pairs; {:.1} s",
        100.0 * worst,
        elapsed.as_secs_f64()
    ))
}

/// 3. The d = 1, p = 2 point-coupling minimizer at N = 4096 is within 2%
/// of the explicit exponential profile, and that profile satisfies the
/// discrete stationarity equation to 1e−3.
fn explicit_profile() -> Outcome {
    let config = SolverConfig { grid_n: 4097, ..SolverConfig::default() };
    let (_, state) = solve_point_energy(1.0, 1, 2.0, &config).map_err(|e| e.to_string())?;
    if !state.converged {
        return Err(format!("point solve did not converge (residual {:.2e})", state.residual));
    }
    let exact = explicit_minimizer_1d(1.0, 2.0).map_err(|e| e.to_string())?;
    let grid = state.field.grid().clone();
    let reference = Field::from_fn(grid.clone(), |x| exact.value(x)).map_err(|e| e.to_string())?;
    let dist = minimizer_distance(&state.field, &reference, 2.0).map_err(|e| e.to_string())?;
    if dist > 0.02 {
        return Err(format!("profile distance {dist:.4} exceeds 0.02"));
    }
    let pot = Potential::point(grid.clone(), 1.0).map_err(|e| e.to_string())?;
    let resid = el_residual(&grid, &reference, &pot, 2.0, exact.energy()).map_err(|e| e.to_string())?;
    if resid > 1e-3 {
        return Err(format!("explicit-profile stationarity residual {resid:.2e} exceeds 1e−3"));
    }
    Ok(format!("profile distance {dist:.2e} ≤ 0.02 at N = 4096; explicit residual {resid:.2e} ≤ 1e−3"))
}

/// 4. Fitted subcritical limits at d = 1: the p = 2 Gaussian sweep recovers
/// −I_h²/4 and the p = 3 sweep recovers the closed-form point energy with
/// S = 3/2, both within 5%.
fn subcritical_limits(fixtures: &Fixtures) -> Outcome {
    let a = fixtures.subcritical_1d.as_ref().map_err(Clone::clone)?;
    let c = fixtures.cubic_1d.as_ref().map_err(Clone::clone)?;
    let start = Instant::now();

    let (alphas, lambdas) = a.result.converged_pairs();
    let fit_a = fit_subcritical(&alphas, &lambdas, 1, 2.0, a.i_h).map_err(|e| e.to_string())?;
    let oracle_a = -0.25 * a.i_h * a.i_h;
    let rel_a = (fit_a.limit - oracle_a).abs() / oracle_a.abs();
    if rel_a > 0.05 {
        return Err(format!(
            "p = 2 fitted limit {:.6} vs −I_h²/4 = {oracle_a:.6} ({:.2}%)",
            fit_a.limit,
            100.0 * rel_a
        ));
    }

    let (alphas, lambdas) = c.result.converged_pairs();
    let fit_c = fit_subcritical(&alphas, &lambdas, 1, 3.0, c.i_h).map_err(|e| e.to_string())?;
    // E(I) = −((p−d)/p) (d/p)^{d/(p−d)} (S I)^{p/(p−d)} at d = 1, p = 3, S = 3/2.
    let oracle_c = -(2.0 / 3.0) * (1.0f64 / 3.0).sqrt() * (1.5 * c.i_h).powf(1.5);
    let rel_c = (fit_c.limit - oracle_c).abs() / oracle_c.abs();
    if rel_c > 0.05 {
        return Err(format!(
            "p = 3 fitted limit {:.6} vs closed form {oracle_c:.6} ({:.2}%)",
            fit_c.limit,
            100.0 * rel_c
        ));
    }

    let elapsed = a.elapsed + c.elapsed + start.elapsed();
    budget(elapsed, 300.0)?;
    Ok(format!(
        "p = 2 limit off by {:.2}%, p = 3 limit off by {:.2}%; {:.0} s",
        100.0 * rel_a,
        100.0 * rel_c,
        elapsed.as_secs_f64()
    ))
}

/// 5. The sign-changing mix with ∫V = 1/2 fits to −I_h²/4 within 8%.
fn signed_potential_limit(fixtures: &Fixtures) -> Outcome {
    let f = fixtures.signed_mix.as_ref().map_err(Clone::clone)?;
    let (alphas, lambdas) = f.result.converged_pairs();
    let fit = fit_subcritical(&alphas, &lambdas, 1, 2.0, f.i_h).map_err(|e| e.to_string())?;
    let oracle = -0.25 * f.i_h * f.i_h;
    let rel = (fit.limit - oracle).abs() / oracle.abs();
    if rel > 0.08 {
        return Err(format!(
            "fitted limit {:.7} vs −I_h²/4 = {oracle:.7} ({:.2}%)",
            fit.limit,
            100.0 * rel
        ));
    }
    Ok(format!("I_h = {:.6}; fitted limit off by {:.2}% (bar 8%)", f.i_h, 100.0 * rel))
}

/// 6. The d = p = 2 exponential regime: the fitted decay rate matches
/// 4π/I_h within 15%.
fn critical_limit(fixtures: &Fixtures) -> Outcome {
    let f = fixtures.critical_2d.as_ref().map_err(Clone::clone)?;
    let start = Instant::now();
    let (alphas, lambdas) = f.result.converged_pairs();
    let fit = fit_critical(&alphas, &lambdas, 2, f.i_h).map_err(|e| e.to_string())?;
    let oracle = 4.0 * PI / f.i_h;
    let rel = (fit.limit - oracle).abs() / oracle;
    if rel > 0.15 {
        return Err(format!(
            "fitted rate {:.4} vs 4π/I_h = {oracle:.4} ({:.2}%)",
            fit.limit,
            100.0 * rel
        ));
    }
    let elapsed = f.elapsed + start.elapsed();
    budget(elapsed, 600.0)?;
    Ok(format!(
        "fitted rate {:.4} vs 4π/I_h = {oracle:.4} ({:.2}%); {:.0} s",
        fit.limit,
        100.0 * rel,
        elapsed.as_secs_f64()
    ))
}

/// 7. Below the d = 3 Hardy threshold (α = 0.2 < 1/4) the capped
/// inverse-square well binds nothing: λ ≥ −1e−6.
fn hardy_threshold() -> Outcome {
    let descriptor = PotentialDescriptor::Hardy { amplitude: 1.0 };
    let config = SolverConfig::default();
    let spec = sweep_grid_spec(&descriptor, 3, 2.0, 0.2, &config).map_err(|e| e.to_string())?;
    let grid = Arc::new(build_grid(spec).map_err(|e| e.to_string())?);
    let pot = Potential::sample(&descriptor, grid)
        .and_then(|v| v.scaled(0.2))
        .map_err(|e| e.to_string())?;
    let state = solve_lambda(&pot, &config).map_err(|e| e.to_string())?;
    if state.lambda < -1e-6 {
        return Err(format!("λ = {:.3e} dips below −1e−6", state.lambda));
    }
    Ok(format!("λ(0.2 V) = {:.2e} ≥ −1e−6 below the coupling threshold", state.lambda))
}

/// 8. λ(α)/α is non-increasing in α (1e−10 slack) across every sweep.
fn ratio_monotonicity(fixtures: &Fixtures) -> Outcome {
    let mut pairs = 0usize;
    for fixture in fixtures.all() {
        let f = fixture.as_ref().map_err(Clone::clone)?;
        // records are stored by descending α
        let ratios: Vec<(f64, f64)> = f
            .result
            .records
            .iter()
            .filter(|r| r.converged())
            .map(|r| (r.alpha, r.lambda() / r.alpha))
            .collect();
        if ratios.len() < 2 {
            return Err(format!("{}: fewer than 2 converged records", f.name));
        }
        for w in ratios.windows(2) {
            if !(w[0].1 <= w[1].1 + 1e-10) {
                return Err(format!(
                    "{}: λ/α rises from {:.8e} at α = {:.4e} to {:.8e} at α = {:.4e}",
                    f.name, w[1].1, w[1].0, w[0].1, w[0].0
                ));
            }
            pairs += 1;
        }
    }
    Ok(format!("λ(α)/α non-increasing over {pairs} adjacent coupling pairs in 4 sweeps"))
}

/// 9. The analytic gradient matches central differences in 20 random
/// directions for each (d, p) in {(1,2), (1,3), (2,2), (2,3)}.
fn gradient_check() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(271_828);
    let mut worst = 0.0f64;
    for (d, p) in [(1u32, 2.0f64), (1, 3.0), (2, 2.0), (2, 3.0)] {
        let spec = if d == 1 { GridSpec::line(129, 5.0) } else { GridSpec::radial(2, 129, 5.0) };
        let grid = Arc::new(build_grid(spec).map_err(|e| e.to_string())?);
        // sign-changing potential so both signs of V exercise the gradient
        let descriptor = PotentialDescriptor::Mix { a1: 1.0, s1: 0.7, a2: 0.4, s2: 1.6 };
        let pot = Potential::sample(&descriptor, grid.clone())
            .and_then(|v| v.scaled(0.8))
            .map_err(|e| e.to_string())?;
        let mut vals: Vec<f64> = grid
            .nodes
            .iter()
            .map(|&x| (1.0 + 0.3 * (2.0 * x).sin()) * (-0.5 * x * x).exp())
            .collect();
        for i in 0..grid.len() {
            if grid.is_dirichlet(i) {
                vals[i] = 0.0;
            }
        }
        let u = Field::new(grid.clone(), vals.clone()).map_err(|e| e.to_string())?;
        let grad = grad_q(&grid, &u, &pot, p, 0.0).map_err(|e| e.to_string())?;
        for _ in 0..20 {
            let dir: Vec<f64> = (0..grid.len())
                .map(|i| if grid.is_dirichlet(i) { 0.0 } else { rng.random_range(-1.0..1.0) })
                .collect();
            // h must stay below the smallest mid-edge gradient divided by the
            // direction's edge slope: for p = 3 the energy is only piecewise
            // C² in t, and a stencil that straddles a |·|³ kink loses two
            // orders — while f64 roundoff at this h is still only ~1e-10
            let h = 1e-6;
            let q_at = |t: f64| -> Result<f64, String> {
                let shifted: Vec<f64> = vals.iter().zip(&dir).map(|(v, w)| v + t * w).collect();
                let f = Field::new(grid.clone(), shifted).map_err(|e| e.to_string())?;
                Ok(eval_q(&grid, &f, &pot, p).map_err(|e| e.to_string())?.q_value)
            };
            let fd = (q_at(h)? - q_at(-h)?) / (2.0 * h);
            let exact: f64 = grad.values().iter().zip(&dir).map(|(a, b)| a * b).sum();
            let rel = (fd - exact).abs() / exact.abs().max(fd.abs()).max(1e-9);
            worst = worst.max(rel);
            if rel > 1e-5 {
                return Err(format!("(d, p) = ({d}, {p}): directional relative error {rel:.2e}"));
            }
        }
    }
    let elapsed = start.elapsed();
    budget(elapsed, 10.0)?;
    Ok(format!(
        "80 random directions over four (d, p) pairs, worst relative error {worst:.1e}; {:.1} s",
        elapsed.as_secs_f64()
    ))
}

/// 10. At p = 2 the solver agrees with an independent Sturm-bisection
/// eigensolve of the same tridiagonal quadratic form, and with the
/// continuum square-well level from k·tan k = √(1−k²), both to 0.5%.
fn linear_oracle() -> Outcome {
    let descriptor = PotentialDescriptor::BoxWell { amplitude: 1.0, radius: 1.0 };
    let config = SolverConfig { grid_n: 8193, ..SolverConfig::default() };
    let spec = sweep_grid_spec(&descriptor, 1, 2.0, 1.0, &config).map_err(|e| e.to_string())?;
    let grid = Arc::new(build_grid(spec).map_err(|e| e.to_string())?);
    let pot = Potential::sample(&descriptor, grid)
        .and_then(|v| v.scaled(1.0))
        .map_err(|e| e.to_string())?;
    let state = solve_lambda(&pot, &config).map_err(|e| e.to_string())?;
    if !state.converged {
        return Err(format!("solver did not converge (residual {:.2e})", state.residual));
    }

    // regenerate the potential on the final (possibly grown) grid and solve
    // the same discrete quadratic form with a dense tridiagonal method
    let fgrid = state.field.grid();
    let fpot = Potential::sample(&descriptor, fgrid.clone())
        .and_then(|v| v.scaled(1.0))
        .map_err(|e| e.to_string())?;
    let lam_tri = tridiagonal_ground_level(fgrid, fpot.values());
    let rel_tri = (state.lambda - lam_tri).abs() / lam_tri.abs();
    if rel_tri > 0.005 {
        return Err(format!(
            "λ = {:.8} vs tridiagonal eigensolve {lam_tri:.8} ({:.3}%)",
            state.lambda,
            100.0 * rel_tri
        ));
    }

    let lam_cont = square_well_level();
    let rel_cont = (state.lambda - lam_cont).abs() / lam_cont.abs();
    if rel_cont > 0.005 {
        return Err(format!(
            "λ = {:.8} vs continuum level {lam_cont:.8} ({:.3}%)",
            state.lambda,
            100.0 * rel_cont
        ));
    }
    Ok(format!(
        "λ = {:.6}; tridiagonal oracle off {:.1e}, continuum root off {:.1e} (bar 0.5%)",
        state.lambda, rel_tri, rel_cont
    ))
}

/// 11. Every converged sweep record sits below its certified test-function
/// bound — an exact floating-point comparison, no tolerance.
fn certified_upper_bounds(fixtures: &Fixtures) -> Outcome {
    let mut checked = 0usize;
    for fixture in [&fixtures.subcritical_1d, &fixtures.cubic_1d, &fixtures.signed_mix] {
        let f = fixture.as_ref().map_err(Clone::clone)?;
        for rec in f.result.records.iter().filter(|r| r.converged()) {
            let grid = rec.state.field.grid();
            let pot = Potential::sample(&f.descriptor, grid.clone())
                .and_then(|v| v.scaled(rec.alpha))
                .map_err(|e| format!("{}: {e}", f.name))?;
            let bound = subcritical_bump_bound(grid, &pot, f.p).map_err(|e| format!("{}: {e}", f.name))?;
            if !(rec.lambda() <= bound) {
                return Err(format!(
                    "{}: λ = {:.12e} exceeds the bump bound {bound:.12e} at α = {:.4e}",
                    f.name,
                    rec.lambda(),
                    rec.alpha
                ));
            }
            checked += 1;
        }
    }
    let f = fixtures.critical_2d.as_ref().map_err(Clone::clone)?;
    for rec in f.result.records.iter().filter(|r| r.converged()) {
        let grid = rec.state.field.grid();
        let pot = Potential::sample(&f.descriptor, grid.clone())
            .and_then(|v| v.scaled(rec.alpha))
            .map_err(|e| format!("{}: {e}", f.name))?;
        let (bound, _) = critical_cutoff_bound(grid, &pot).map_err(|e| format!("{}: {e}", f.name))?;
        if !(rec.lambda() <= bound) {
            return Err(format!(
                "{}: λ = {:.12e} exceeds the cutoff bound {bound:.12e} at α = {:.4e}",
                f.name,
                rec.lambda(),
                rec.alpha
            ));
        }
        checked += 1;
    }
    Ok(format!("λ ≤ certified test-function bound for all {checked} converged records (exact comparison)"))
}

/// 12. Log–log regression of the sweep diagnostics at d = 1, p = 2
/// reproduces the a-priori exponents 1/(p−d) and d/(p−d) within 10%.
fn apriori_exponents(fixtures: &Fixtures) -> Outcome {
    let f = fixtures.subcritical_1d.as_ref().map_err(Clone::clone)?;
    let s_grad =
        exponent_regression(&f.result.records, SweepQuantity::GradNorm).map_err(|e| e.to_string())?;
    let s_sup =
        exponent_regression(&f.result.records, SweepQuantity::SupNormP).map_err(|e| e.to_string())?;
    // at d = 1, p = 2 both targets equal 1
    for (label, slope) in [("gradient-norm", s_grad), ("sup-norm^p", s_sup)] {
        if (slope - 1.0).abs() > 0.10 {
            return Err(format!("{label} slope {slope:.4} is more than 10% from 1"));
        }
    }
    Ok(format!("slopes {s_grad:.4} (∇, target 1) and {s_sup:.4} (sup^p, target 1) within 10%"))
}

// ---------------------------------------------------------------- oracles

/// Ground level of the continuum unit square well (depth 1, half-width 1):
/// the even bound state satisfies k·tan k = √(1−k²) with λ = k² − 1.
fn square_well_level() -> f64 {
    let g = |k: f64| k * k.tan() - (1.0 - k * k).sqrt();
    let (mut lo, mut hi) = (1e-9, 1.0 - 1e-15);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let k = 0.5 * (lo + hi);
    k * k - 1.0
}

/// Smallest eigenvalue of the interior generalized problem
/// `(K − diag(w v)) u = λ diag(w) u` that the p = 2 functional minimizes,
/// symmetrized to a tridiagonal matrix and solved by bisection on the
/// Sturm negative-pivot count.
fn tridiagonal_ground_level(grid: &Arc<Grid>, v: &[f64]) -> f64 {
    let h2 = grid.spacing * grid.spacing;
    let idx: Vec<usize> = grid.interior().collect();
    let m = idx.len();
    let mut diag = Vec::with_capacity(m);
    let mut off = Vec::with_capacity(m.saturating_sub(1));
    for (k, &i) in idx.iter().enumerate() {
        let w = grid.weights[i];
        diag.push((grid.mid_weights[i - 1] + grid.mid_weights[i]) / h2 / w - v[i]);
        if k + 1 < m {
            off.push(-grid.mid_weights[i] / h2 / (w * grid.weights[i + 1]).sqrt());
        }
    }
    let count_below = |x: f64| -> usize {
        let mut count = 0usize;
        let mut q = diag[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for k in 1..m {
            let den = if q.abs() < 1e-300 { 1e-300f64.copysign(q) } else { q };
            q = diag[k] - x - off[k - 1] * off[k - 1] / den;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    };
    let spread = 2.0 * off.iter().fold(0.0f64, |a, &e| a.max(e.abs()));
    let mut lo = diag.iter().cloned().fold(f64::INFINITY, f64::min) - spread;
    let mut hi = diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + spread;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count_below(mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-14 * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}
