//! Command-line front end.
//!
//! Five subcommands cover the desk workflow: `solve` (one eigenvalue,
//! JSON), `sweep` (a coupling grid, CSV), `sobolev` (the interpolation
//! constant and point energy, JSON), `fit` (limit-law extraction from an
//! inline sweep or a saved CSV, JSON), and `validate` (the built-in
//! consistency battery).
//!
//! Artifacts are deterministic: identical arguments produce byte-identical
//! output regardless of thread count, floats print with shortest
//! round-trip digits, CSV rows are ordered by descending coupling and
//! terminated with `\n`, and JSON keys are sorted. Exit codes: 0 success,
//! 2 configuration/usage, 3 data/numerics, 4 I/O.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::asymptotics::{alpha_grid, fit_critical, fit_subcritical, sweep, SweepResult};
use crate::closed_forms::{
    capacity_annulus, explicit_minimizer_1d, point_energy_closed_1d, point_energy_from_sobolev,
    predicted_lambda_subcritical, sobolev_constant, sobolev_estimate, subcritical_bump_bound,
    unit_sphere_area,
};
use crate::functional::{el_residual, eval_q, grad_q, Potential};
use crate::grid::{build_grid, Field, GridKind, GridSpec};
use crate::potential::{parse_potential, PotentialDescriptor};
use crate::solver::{solve_lambda, solve_point_energy, sweep_grid_spec, DomainPolicy, SolverConfig};
use crate::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "plap",
    version,
    about = "Ground states of the p-Laplacian with a weakly coupled potential"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Lowest eigenvalue for a single coupling (JSON)
    Solve(SolveArgs),
    /// Eigenvalues across a coupling grid (CSV, descending coupling)
    Sweep(SweepArgs),
    /// Interpolation constant S and point energy E(1) (JSON)
    Sobolev(SobolevArgs),
    /// Fit the weak-coupling limit law to a sweep (JSON)
    Fit(FitArgs),
    /// Run the built-in consistency checks
    Validate(ValidateArgs),
}

#[derive(Args, Debug)]
pub struct ProblemArgs {
    /// Space dimension
    #[arg(long, default_value_t = 1)]
    pub d: u32,
    /// Energy exponent p
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Potential descriptor: gaussian:A=..,s=.. | box:A=..,R=.. | mix:.. | hardy:A=.. | file:path
    #[arg(long, default_value = "gaussian:A=1,s=1")]
    pub potential: String,
    /// Minimum number of grid nodes
    #[arg(long)]
    pub grid_n: Option<usize>,
    /// Euler–Lagrange residual tolerance
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Args, Debug)]
pub struct OutputArgs {
    /// Write the artifact to a file instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Coupling constant
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Fix the domain extent instead of adapting it
    #[arg(long)]
    pub grid_l: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Comma-separated couplings; defaults to a geometric grid for the regime
    #[arg(long)]
    pub alphas: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct SobolevArgs {
    /// Space dimension
    #[arg(long, default_value_t = 1)]
    pub d: u32,
    /// Energy exponent p (must exceed d)
    #[arg(long)]
    pub p: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Comma-separated couplings for the inline sweep
    #[arg(long)]
    pub alphas: Option<String>,
    /// Fit a previously saved sweep CSV instead of solving
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Potential integral for the prediction (required with --input)
    #[arg(long)]
    pub integral: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Shortest-round-trip float formatting for artifacts: `0` for either
/// zero, scientific notation outside `[1e-4, 1e16)`, plain decimal inside.
/// `parse::<f64>()` on the output recovers the input bit for bit.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if x.abs() < 1e-4 || x.abs() >= 1e16 {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let (text, out) = match cli.command {
        Command::Solve(a) => (run_solve(&a)?, a.output.out),
        Command::Sweep(a) => (run_sweep(&a)?, a.output.out),
        Command::Sobolev(a) => (run_sobolev(&a)?, a.output.out),
        Command::Fit(a) => (run_fit(&a)?, a.output.out),
        Command::Validate(a) => {
            // report what ran even when a check fails, then signal failure
            let (text, ok) = run_validate();
            write_out(a.output.out.as_deref(), &text)?;
            return if ok {
                Ok(())
            } else {
                Err(Error::Data("one or more consistency checks failed".into()))
            };
        }
    };
    write_out(out.as_deref(), &text)
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn build_config(p: f64, grid_n: Option<usize>, tol: Option<f64>) -> Result<SolverConfig> {
    let mut cfg = SolverConfig { p, ..SolverConfig::default() };
    if let Some(n) = grid_n {
        cfg.grid_n = n;
    }
    if let Some(t) = tol {
        cfg.tol_residual = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parse_alphas(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    let mut offset = 0usize;
    for piece in text.split(',') {
        let trimmed = piece.trim();
        match trimmed.parse::<f64>() {
            Ok(v) => out.push(v),
            Err(_) => {
                return Err(Error::Parse {
                    position: offset,
                    message: format!("expected a number in the coupling list, found {trimmed:?}"),
                })
            }
        }
        offset += piece.len() + 1;
    }
    Ok(out)
}

/// `I = ∫ V` for the gate and prediction: analytic when the descriptor has
/// one, otherwise quadrature on a wide probe grid.
fn estimate_integral(desc: &PotentialDescriptor, d: u32) -> Result<f64> {
    if let Some(v) = desc.analytic_integral(d) {
        return Ok(v);
    }
    let l = (8.0 * desc.extent_scale()).max(8.0);
    let spec = if d == 1 { GridSpec::line(4097, l) } else { GridSpec::radial(d, 4097, l) };
    let grid = Arc::new(build_grid(spec)?);
    Ok(Potential::sample(desc, grid)?.integral())
}

fn default_alphas(d: u32, p: f64) -> Result<Vec<f64>> {
    if p > d as f64 {
        alpha_grid(1e-3, 0.3, 12)
    } else {
        alpha_grid(0.05, 0.8, 10)
    }
}

fn run_solve(args: &SolveArgs) -> Result<String> {
    let d = args.problem.d;
    let p = args.problem.p;
    let alpha = args.alpha;
    let desc = parse_potential(&args.problem.potential)?;
    let mut cfg = build_config(p, args.problem.grid_n, args.problem.tol)?;
    let mut spec = sweep_grid_spec(&desc, d, p, alpha, &cfg)?;
    if let Some(l) = args.grid_l {
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::Config(format!("domain extent must be positive, got {l}")));
        }
        spec = match spec.kind {
            GridKind::Line => GridSpec::line(spec.n, l),
            GridKind::Radial => GridSpec::radial(d, spec.n, l),
            GridKind::LogRadius => GridSpec::log_radius(d, spec.n, spec.t_min, l),
        };
        cfg.domain = DomainPolicy::Fixed;
    }
    let grid = Arc::new(build_grid(spec)?);
    let pot = Potential::sample(&desc, grid)?.scaled(alpha)?;
    let state = solve_lambda(&pot, &cfg)?;
    let value = serde_json::json!({
        "alpha": alpha,
        "d": d,
        "p": p,
        "potential": desc.to_string(),
        "lambda": state.lambda,
        "grad_norm_p": state.grad_norm_p(),
        "sup_u": state.breakdown.sup_norm,
        "residual": state.residual,
        "iterations": state.iterations,
        "converged": state.converged,
        "domain_extent": state.domain_extent,
        "grid_nodes": state.field.grid().len(),
        "potential_integral": state.potential_integral,
        "radial_restricted": state.radial_restricted,
        "breakdown": {
            "kinetic": state.breakdown.kinetic,
            "potential_term": state.breakdown.potential_term,
            "q_value": state.breakdown.q_value,
            "p_mass": state.breakdown.p_mass,
            "sup_norm": state.breakdown.sup_norm,
            "rayleigh": state.breakdown.rayleigh,
        },
    });
    Ok(pretty(&value))
}

fn sweep_from_args(
    problem: &ProblemArgs,
    alphas: Option<&str>,
) -> Result<SweepResult> {
    let d = problem.d;
    let p = problem.p;
    let desc = parse_potential(&problem.potential)?;
    let i_h = estimate_integral(&desc, d)?;
    if !(i_h > 0.0) {
        return Err(Error::Data(format!(
            "sweeps study potentials with positive integral; this one has I = {}",
            fmt_f64(i_h)
        )));
    }
    let cfg = build_config(p, problem.grid_n, problem.tol)?;
    let alphas = match alphas {
        Some(list) => parse_alphas(list)?,
        None => default_alphas(d, p)?,
    };
    if let (Some(lo), Some(hi)) = (
        alphas.iter().copied().reduce(f64::min),
        alphas.iter().copied().reduce(f64::max),
    ) {
        eprintln!("sweep: {} couplings in [{}, {}], d = {d}, p = {p}", alphas.len(), fmt_f64(lo), fmt_f64(hi));
    }
    sweep(&desc, d, p, &alphas, &cfg)
}

fn run_sweep(args: &SweepArgs) -> Result<String> {
    let result = sweep_from_args(&args.problem, args.alphas.as_deref())?;
    Ok(match args.format {
        Format::Csv => emit_csv(&result),
        Format::Json => {
            let rows: Vec<serde_json::Value> = result
                .records
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "alpha": r.alpha,
                        "lambda": r.lambda(),
                        "grad_norm_p": r.grad_norm_p(),
                        "sup_u": r.sup_u(),
                        "residual": r.residual(),
                        "iterations": r.iterations(),
                        "converged": r.converged(),
                        "domain_extent": r.domain_extent(),
                    })
                })
                .collect();
            pretty(&serde_json::Value::Array(rows))
        }
    })
}

fn run_sobolev(args: &SobolevArgs) -> Result<String> {
    let (s, e1) = if args.d == 1 {
        (sobolev_constant(1, args.p)?, point_energy_closed_1d(1.0, args.p))
    } else {
        let est = sobolev_estimate(args.d, args.p)?;
        (est.value, est.point_energy)
    };
    Ok(pretty(&serde_json::json!({ "S": s, "E1": e1 })))
}

fn run_fit(args: &FitArgs) -> Result<String> {
    let d = args.problem.d;
    let p = args.problem.p;
    let (alphas, lambdas, i_h) = match &args.input {
        Some(path) => {
            if args.alphas.is_some() {
                return Err(Error::Usage("--alphas selects an inline sweep; it cannot combine with --input".into()));
            }
            let i_h = args.integral.ok_or_else(|| {
                Error::Usage("--input carries no potential, so --integral is required".into())
            })?;
            let rows = parse_csv(&std::fs::read_to_string(path)?)?;
            let kept: Vec<&SweepRow> = rows.iter().filter(|r| r.converged).collect();
            (
                kept.iter().map(|r| r.alpha).collect::<Vec<_>>(),
                kept.iter().map(|r| r.lambda).collect::<Vec<_>>(),
                i_h,
            )
        }
        None => {
            let result = sweep_from_args(&args.problem, args.alphas.as_deref())?;
            let (alphas, lambdas) = result.converged_pairs();
            let i_h = match args.integral {
                Some(v) => v,
                None => result
                    .integral()
                    .ok_or_else(|| Error::Data("the sweep produced no records to fit".into()))?,
            };
            (alphas, lambdas, i_h)
        }
    };
    let fit = if p > d as f64 {
        fit_subcritical(&alphas, &lambdas, d, p, i_h)?
    } else if p == d as f64 && d >= 2 {
        fit_critical(&alphas, &lambdas, d, i_h)?
    } else {
        return Err(Error::Config(format!(
            "no weak-coupling limit law applies at d = {d}, p = {p}"
        )));
    };
    Ok(pretty(&serde_json::to_value(&fit).map_err(|e| Error::Numerics(e.to_string()))?))
}

fn pretty(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("finite JSON");
    s.push('\n');
    s
}

const CSV_HEADER: &str = "alpha,lambda,grad_norm_p,sup_u,residual,iterations,converged,domain_extent";

/// Serializes a sweep with one row per record, descending coupling, LF
/// line ends. `parse_csv` recovers every float bit for bit.
pub fn emit_csv(result: &SweepResult) -> String {
    let mut out = String::from(CSV_HEADER);
    for r in &result.records {
        out.push('\n');
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}",
            fmt_f64(r.alpha),
            fmt_f64(r.lambda()),
            fmt_f64(r.grad_norm_p()),
            fmt_f64(r.sup_u()),
            fmt_f64(r.residual()),
            r.iterations(),
            r.converged(),
            fmt_f64(r.domain_extent())
        ));
    }
    out.push('\n');
    out
}

/// One parsed sweep row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    pub lambda: f64,
    pub grad_norm_p: f64,
    pub sup_u: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub domain_extent: f64,
}

/// Parses sweep CSV text produced by [`emit_csv`]. Parse errors carry the
/// byte offset of the offending line.
pub fn parse_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    let mut offset = 0usize;
    let mut saw_header = false;
    for line in text.split('\n') {
        let at = offset;
        offset += line.len() + 1;
        if line.is_empty() {
            continue;
        }
        if !saw_header {
            if line != CSV_HEADER {
                return Err(Error::Parse {
                    position: at,
                    message: format!("expected header {CSV_HEADER:?}"),
                });
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(Error::Parse {
                position: at,
                message: format!("expected 8 fields, found {}", fields.len()),
            });
        }
        let num = |i: usize| -> Result<f64> {
            fields[i].parse::<f64>().map_err(|_| Error::Parse {
                position: at,
                message: format!("field {}: {:?} is not a number", i + 1, fields[i]),
            })
        };
        let iterations = fields[5].parse::<usize>().map_err(|_| Error::Parse {
            position: at,
            message: format!("field 6: {:?} is not an iteration count", fields[5]),
        })?;
        let converged = match fields[6] {
            "true" => true,
            "false" => false,
            other => {
                return Err(Error::Parse {
                    position: at,
                    message: format!("field 7: {other:?} is not true/false"),
                })
            }
        };
        rows.push(SweepRow {
            alpha: num(0)?,
            lambda: num(1)?,
            grad_norm_p: num(2)?,
            sup_u: num(3)?,
            residual: num(4)?,
            iterations,
            converged,
            domain_extent: num(5 + 2)?,
        });
    }
    if !saw_header {
        return Err(Error::Parse { position: 0, message: "empty input; expected a sweep CSV".into() });
    }
    Ok(rows)
}

type Check = (&'static str, fn() -> std::result::Result<(), String>);

fn check(ok: bool, msg: String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn check_sphere_areas() -> std::result::Result<(), String> {
    let targets = [(1, 2.0), (2, std::f64::consts::TAU), (3, 4.0 * std::f64::consts::PI)];
    for (d, want) in targets {
        let got = unit_sphere_area(d);
        check(rel(got, want) < 1e-14, format!("area of S^{} came out {got}, want {want}", d - 1))?;
    }
    Ok(())
}

fn check_interpolation_identity() -> std::result::Result<(), String> {
    let e = point_energy_from_sobolev(1.0, 1, 3.0, 1.5);
    let want = -1.0 / 2.0f64.sqrt();
    check(rel(e, want) < 1e-14, format!("E(1) from S gave {e}, want {want}"))?;
    let one = point_energy_from_sobolev(1.0, 2, 3.0, 1.3);
    let two = point_energy_from_sobolev(2.0, 2, 3.0, 1.3);
    check(rel(two, one * 8.0) < 1e-13, format!("homogeneity broke: E(2) = {two}, 8 E(1) = {}", 8.0 * one))
}

fn check_prediction_scaling() -> std::result::Result<(), String> {
    let base = predicted_lambda_subcritical(1.0, 1, 3.0, 1.0).map_err(|e| e.to_string())?;
    let scaled = predicted_lambda_subcritical(0.37, 1, 3.0, 1.0).map_err(|e| e.to_string())?;
    let ratio = scaled / base;
    let want = 0.37f64.powf(1.5);
    check(rel(ratio, want) < 1e-13, format!("coupling scaling gave {ratio}, want {want}"))
}

fn check_capacity_invariance() -> std::result::Result<(), String> {
    let a = capacity_annulus(0.7, 19.0, 2).map_err(|e| e.to_string())?;
    let b = capacity_annulus(3.5, 95.0, 2).map_err(|e| e.to_string())?;
    check(rel(a, b) < 1e-13, format!("capacity changed under scaling: {a} vs {b}"))
}

fn check_gradient() -> std::result::Result<(), String> {
    let p = 2.4;
    let grid = Arc::new(build_grid(GridSpec::line(65, 4.0)).map_err(|e| e.to_string())?);
    let desc = parse_potential("gaussian:A=1,s=1").map_err(|e| e.to_string())?;
    let pot = Potential::sample(&desc, grid.clone()).map_err(|e| e.to_string())?;
    let n = grid.len();
    let mut base = vec![0.0; n];
    let mut dir = vec![0.0; n];
    for i in 1..n - 1 {
        let x = grid.nodes[i];
        base[i] = (-x * x).exp() * (1.0 + 0.3 * (2.0 * x).sin());
        dir[i] = (3.7 * i as f64).sin();
    }
    let u = Field::new(grid.clone(), base.clone()).map_err(|e| e.to_string())?;
    let g = grad_q(&grid, &u, &pot, p, 0.0).map_err(|e| e.to_string())?;
    let pairing: f64 = g.values().iter().zip(&dir).map(|(a, b)| a * b).sum();
    let h = 1e-6;
    let mut plus = base.clone();
    let mut minus = base;
    for i in 0..n {
        plus[i] += h * dir[i];
        minus[i] -= h * dir[i];
    }
    let qp = eval_q(&grid, &Field::new(grid.clone(), plus).map_err(|e| e.to_string())?, &pot, p)
        .map_err(|e| e.to_string())?
        .q_value;
    let qm = eval_q(&grid, &Field::new(grid.clone(), minus).map_err(|e| e.to_string())?, &pot, p)
        .map_err(|e| e.to_string())?
        .q_value;
    let fd = (qp - qm) / (2.0 * h);
    check(rel(pairing, fd) < 1e-5, format!("gradient pairing {pairing} vs finite difference {fd}"))
}

fn check_point_problem() -> std::result::Result<(), String> {
    let cfg = SolverConfig { grid_n: 1025, ..SolverConfig::default() };
    let (e, state) = solve_point_energy(1.0, 1, 2.0, &cfg).map_err(|e| e.to_string())?;
    check(state.converged, "point solve did not converge".into())?;
    check(rel(e, -0.25) < 5e-3, format!("E(1) at d = 1, p = 2 gave {e}, want -0.25"))
}

fn check_explicit_residual() -> std::result::Result<(), String> {
    let m = explicit_minimizer_1d(1.0, 2.0).map_err(|e| e.to_string())?;
    let grid = Arc::new(build_grid(GridSpec::line(4097, 30.0)).map_err(|e| e.to_string())?);
    let field = Field::from_fn(grid.clone(), |x| m.value(x)).map_err(|e| e.to_string())?;
    let pot = Potential::point(grid.clone(), 1.0).map_err(|e| e.to_string())?;
    let r = el_residual(&grid, &field, &pot, 2.0, m.energy()).map_err(|e| e.to_string())?;
    check(r <= 1e-3, format!("explicit profile residual {r} exceeds 1e-3"))
}

fn check_sweep_artifacts() -> std::result::Result<(), String> {
    let desc = parse_potential("gaussian:A=1,s=1").map_err(|e| e.to_string())?;
    let cfg = SolverConfig { grid_n: 257, ..SolverConfig::default() };
    let result = sweep(&desc, 1, 2.0, &[0.2, 0.1], &cfg).map_err(|e| e.to_string())?;
    let rows = parse_csv(&emit_csv(&result)).map_err(|e| e.to_string())?;
    check(rows.len() == result.records.len(), "row count drifted through CSV".into())?;
    for (row, rec) in rows.iter().zip(&result.records) {
        check(
            row.alpha.to_bits() == rec.alpha.to_bits()
                && row.lambda.to_bits() == rec.lambda().to_bits()
                && row.residual.to_bits() == rec.residual().to_bits()
                && row.domain_extent.to_bits() == rec.domain_extent().to_bits(),
            format!("CSV round trip drifted at coupling {}", rec.alpha),
        )?;
        // reported eigenvalue never beats its certifying quotient
        let grid = rec.state.field.grid().clone();
        let pot = Potential::sample(&desc, grid.clone())
            .and_then(|p| p.scaled(rec.alpha))
            .map_err(|e| e.to_string())?;
        let bound = subcritical_bump_bound(&grid, &pot, 2.0).map_err(|e| e.to_string())?;
        check(
            rec.lambda() <= bound,
            format!("λ = {} exceeds its test-function bound {bound}", rec.lambda()),
        )?;
    }
    Ok(())
}

/// The consistency battery behind `plap validate`: closed-form identities,
/// a gradient check, a tiny solve against the exact point energy, and a
/// CSV round trip with its eigenvalue bound. Returns the report and
/// whether every check passed.
pub fn run_validate() -> (String, bool) {
    let checks: [Check; 8] = [
        ("sphere areas", check_sphere_areas),
        ("interpolation identity", check_interpolation_identity),
        ("prediction scaling", check_prediction_scaling),
        ("capacity invariance", check_capacity_invariance),
        ("gradient consistency", check_gradient),
        ("point problem", check_point_problem),
        ("explicit profile residual", check_explicit_residual),
        ("sweep artifacts", check_sweep_artifacts),
    ];
    let mut report = String::new();
    let mut failures = 0usize;
    for (name, f) in checks {
        match f() {
            Ok(()) => report.push_str(&format!("ok   {name}\n")),
            Err(msg) => {
                failures += 1;
                report.push_str(&format!("FAIL {name}: {msg}\n"));
            }
        }
    }
    report.push_str(&format!("{} of {} checks passed\n", checks.len() - failures, checks.len()));
    (report, failures == 0)
}
