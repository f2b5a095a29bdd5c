//! Potential shapes and their text format.
//!
//! A descriptor names a radial profile `V(|x|)` plus parameters. The text
//! form is `tag:key=value,...`:
//!
//! ```text
//! gaussian:A=1,s=0.5        A exp(-x^2 / 2s^2)
//! box:A=1,R=1               A on |x| <= R, 0 outside
//! mix:A1=1,s1=1,A2=0.5,s2=2 difference of two gaussians (sign-changing)
//! hardy:A=1                 A min(1, x^-2), borderline decay
//! file:samples.csv          two-column samples, linear interpolation
//! ```
//!
//! Keys may be omitted (documented defaults apply) and parse errors carry
//! the byte offset of the offending token. `file:` data is read eagerly so
//! a descriptor is self-contained once parsed; outside the sampled range
//! the profile is extended by zero.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialDescriptor {
    Gaussian { amplitude: f64, width: f64 },
    BoxWell { amplitude: f64, radius: f64 },
    /// `A1 e^{-x²/2s1²} − A2 e^{-x²/2s2²}`; with `A2 s2^d > 0` the negative
    /// part is real, which makes this the stock sign-changing example.
    Mix { a1: f64, s1: f64, a2: f64, s2: f64 },
    /// `A min(1, x^{-2})`: integrable in 1D only, borderline for the Hardy
    /// inequality when d > p.
    Hardy { amplitude: f64 },
    File { path: String, samples: Vec<(f64, f64)> },
}

impl PotentialDescriptor {
    /// The profile value at signed coordinate or radius `x`.
    pub fn value(&self, x: f64) -> f64 {
        let r = x.abs();
        match self {
            PotentialDescriptor::Gaussian { amplitude, width } => amplitude * (-0.5 * (r / width).powi(2)).exp(),
            // half value exactly at the jump: the sampling for which
            // trapezoid quadrature reproduces A·|B_R| on aligned grids
            PotentialDescriptor::BoxWell { amplitude, radius } => match r.partial_cmp(radius) {
                Some(std::cmp::Ordering::Less) => *amplitude,
                Some(std::cmp::Ordering::Equal) => 0.5 * amplitude,
                _ => 0.0,
            },
            PotentialDescriptor::Mix { a1, s1, a2, s2 } => {
                a1 * (-0.5 * (r / s1).powi(2)).exp() - a2 * (-0.5 * (r / s2).powi(2)).exp()
            }
            PotentialDescriptor::Hardy { amplitude } => {
                if r <= 1.0 {
                    *amplitude
                } else {
                    amplitude / (r * r)
                }
            }
            PotentialDescriptor::File { samples, .. } => interp_samples(samples, r),
        }
    }

    /// `∫_{R^d} V dx` when available in closed form.
    pub fn analytic_integral(&self, d: u32) -> Option<f64> {
        let df = d as f64;
        match self {
            PotentialDescriptor::Gaussian { amplitude, width } => {
                Some(amplitude * (2.0 * std::f64::consts::PI).powf(0.5 * df) * width.powf(df))
            }
            PotentialDescriptor::BoxWell { amplitude, radius } => {
                Some(amplitude * crate::closed_forms::unit_sphere_area(d) * radius.powf(df) / df)
            }
            PotentialDescriptor::Mix { a1, s1, a2, s2 } => {
                Some((2.0 * std::f64::consts::PI).powf(0.5 * df) * (a1 * s1.powf(df) - a2 * s2.powf(df)))
            }
            // ∫ A min(1, x^{-2}) dx = 4A on the line; divergent once the
            // sphere area grows like r^{d-1}.
            PotentialDescriptor::Hardy { amplitude } => (d == 1).then_some(4.0 * amplitude),
            PotentialDescriptor::File { .. } => None,
        }
    }

    /// Finest length scale a grid must resolve.
    pub fn resolution_scale(&self) -> f64 {
        match self {
            PotentialDescriptor::Gaussian { width, .. } => *width,
            PotentialDescriptor::BoxWell { radius, .. } => *radius,
            PotentialDescriptor::Mix { s1, s2, .. } => s1.min(*s2),
            PotentialDescriptor::Hardy { .. } => 1.0,
            PotentialDescriptor::File { samples, .. } => samples
                .windows(2)
                .map(|w| w[1].0 - w[0].0)
                .fold(f64::INFINITY, f64::min)
                .max(1e-12),
        }
    }

    /// Radius beyond which the profile is negligible (or zero); domains are
    /// sized as multiples of this.
    pub fn extent_scale(&self) -> f64 {
        match self {
            PotentialDescriptor::Gaussian { width, .. } => *width,
            PotentialDescriptor::BoxWell { radius, .. } => *radius,
            PotentialDescriptor::Mix { s1, s2, .. } => s1.max(*s2),
            PotentialDescriptor::Hardy { .. } => 1.0,
            PotentialDescriptor::File { samples, .. } => samples.last().map_or(1.0, |s| s.0.max(1.0)),
        }
    }
}

impl fmt::Display for PotentialDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = crate::cli::fmt_f64;
        match self {
            PotentialDescriptor::Gaussian { amplitude, width } => {
                write!(f, "gaussian:A={},s={}", n(*amplitude), n(*width))
            }
            PotentialDescriptor::BoxWell { amplitude, radius } => {
                write!(f, "box:A={},R={}", n(*amplitude), n(*radius))
            }
            PotentialDescriptor::Mix { a1, s1, a2, s2 } => {
                write!(f, "mix:A1={},s1={},A2={},s2={}", n(*a1), n(*s1), n(*a2), n(*s2))
            }
            PotentialDescriptor::Hardy { amplitude } => write!(f, "hardy:A={}", n(*amplitude)),
            PotentialDescriptor::File { path, .. } => write!(f, "file:{path}"),
        }
    }
}

impl Serialize for PotentialDescriptor {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Parse the `tag:key=value,...` form. Errors carry the byte offset of the
/// offending token within `text`.
pub fn parse_potential(text: &str) -> Result<PotentialDescriptor> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(Error::Parse { position: 0, message: "empty potential descriptor".into() });
    }
    let base = text.len() - text.trim_start().len();
    let (tag, rest, rest_at) = match trimmed.find(':') {
        Some(i) => (&trimmed[..i], &trimmed[i + 1..], base + i + 1),
        None => (trimmed, "", base + trimmed.len()),
    };
    match tag {
        "file" => {
            if rest.is_empty() {
                return Err(Error::Parse { position: rest_at, message: "file potential needs a path".into() });
            }
            load_samples(rest)
        }
        "gaussian" => {
            let kv = parse_assignments(rest, rest_at, &["A", "s"])?;
            let width = kv[1].unwrap_or((1.0, rest_at)).check_positive("width s")?;
            Ok(PotentialDescriptor::Gaussian { amplitude: kv[0].unwrap_or((1.0, rest_at)).0, width })
        }
        "box" => {
            let kv = parse_assignments(rest, rest_at, &["A", "R"])?;
            let radius = kv[1].unwrap_or((1.0, rest_at)).check_positive("radius R")?;
            Ok(PotentialDescriptor::BoxWell { amplitude: kv[0].unwrap_or((1.0, rest_at)).0, radius })
        }
        "mix" => {
            let kv = parse_assignments(rest, rest_at, &["A1", "s1", "A2", "s2"])?;
            Ok(PotentialDescriptor::Mix {
                a1: kv[0].unwrap_or((1.0, rest_at)).0,
                s1: kv[1].unwrap_or((1.0, rest_at)).check_positive("width s1")?,
                a2: kv[2].unwrap_or((0.5, rest_at)).0,
                s2: kv[3].unwrap_or((2.0, rest_at)).check_positive("width s2")?,
            })
        }
        "hardy" => {
            let kv = parse_assignments(rest, rest_at, &["A"])?;
            Ok(PotentialDescriptor::Hardy { amplitude: kv[0].unwrap_or((1.0, rest_at)).0 })
        }
        other => Err(Error::Parse {
            position: base,
            message: format!("unknown potential kind `{other}` (expected gaussian, box, mix, hardy, or file)"),
        }),
    }
}

trait CheckPositive {
    fn check_positive(self, name: &str) -> Result<f64>;
}

impl CheckPositive for (f64, usize) {
    fn check_positive(self, name: &str) -> Result<f64> {
        if self.0 > 0.0 {
            Ok(self.0)
        } else {
            Err(Error::Parse { position: self.1, message: format!("{name} must be positive, got {}", self.0) })
        }
    }
}

/// Parse `key=value` pairs separated by commas; returns per-key `(value,
/// byte offset of the value)` in the order of `keys`.
fn parse_assignments(rest: &str, rest_at: usize, keys: &[&str]) -> Result<Vec<Option<(f64, usize)>>> {
    let mut out = vec![None; keys.len()];
    if rest.trim().is_empty() {
        return Ok(out);
    }
    let mut cursor = 0usize;
    for piece in rest.split(',') {
        let piece_at = rest_at + cursor;
        cursor += piece.len() + 1;
        let lead = piece.len() - piece.trim_start().len();
        let body = piece.trim();
        if body.is_empty() {
            return Err(Error::Parse { position: piece_at + lead, message: "empty assignment".into() });
        }
        let eq = body.find('=').ok_or_else(|| Error::Parse {
            position: piece_at + lead,
            message: format!("expected key=value, got `{body}`"),
        })?;
        let key = body[..eq].trim_end();
        let value_at = piece_at + lead + eq + 1;
        let value_str = body[eq + 1..].trim();
        let slot = keys.iter().position(|k| *k == key).ok_or_else(|| Error::Parse {
            position: piece_at + lead,
            message: format!("unknown key `{key}` (expected one of {})", keys.join(", ")),
        })?;
        let value = f64::from_str(value_str).map_err(|_| Error::Parse {
            position: value_at,
            message: format!("`{value_str}` is not a number"),
        })?;
        if !value.is_finite() {
            return Err(Error::Parse { position: value_at, message: format!("`{value_str}` is not finite") });
        }
        if out[slot].is_some() {
            return Err(Error::Parse { position: piece_at + lead, message: format!("duplicate key `{key}`") });
        }
        out[slot] = Some((value, value_at));
    }
    Ok(out)
}

fn load_samples(path: &str) -> Result<PotentialDescriptor> {
    let text = std::fs::read_to_string(path)?;
    let mut samples: Vec<(f64, f64)> = Vec::new();
    let mut offset = 0usize;
    for line in text.split_inclusive('\n') {
        let line_at = offset;
        offset += line.len();
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let mut cols = body.splitn(2, |c: char| c == ',' || c.is_whitespace());
        let bad = |what: &str| Error::Parse {
            position: line_at,
            message: format!("{path}: {what} in line `{body}`"),
        };
        let x: f64 = cols.next().and_then(|s| s.trim().parse().ok()).ok_or_else(|| bad("bad coordinate"))?;
        let v: f64 = cols.next().and_then(|s| s.trim().parse().ok()).ok_or_else(|| bad("bad value"))?;
        if !x.is_finite() || !v.is_finite() || x < 0.0 {
            return Err(bad("samples must be finite with coordinate >= 0"));
        }
        samples.push((x, v));
    }
    if samples.len() < 2 {
        return Err(Error::Parse { position: 0, message: format!("{path}: need at least two samples") });
    }
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    if samples.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::Parse { position: 0, message: format!("{path}: duplicate sample coordinate") });
    }
    Ok(PotentialDescriptor::File { path: path.to_string(), samples })
}

fn interp_samples(samples: &[(f64, f64)], r: f64) -> f64 {
    let first = samples[0];
    let last = samples[samples.len() - 1];
    if r < first.0 || r > last.0 {
        return 0.0;
    }
    let idx = samples.partition_point(|s| s.0 <= r);
    if idx == 0 {
        return first.1;
    }
    if idx == samples.len() {
        return last.1;
    }
    let (x0, v0) = samples[idx - 1];
    let (x1, v1) = samples[idx];
    v0 + (v1 - v0) * (r - x0) / (x1 - x0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, quadrature, GridSpec};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::io::Write as _;

    fn parse_err_at(text: &str) -> usize {
        match parse_potential(text) {
            Err(Error::Parse { position, .. }) => position,
            other => panic!("expected parse error for `{text}`, got {other:?}"),
        }
    }

    #[test]
    fn parses_and_round_trips() {
        for text in [
            "gaussian:A=1,s=0.5",
            "box:A=2,R=1",
            "mix:A1=1,s1=1,A2=0.5,s2=2",
            "hardy:A=0.2",
            "gaussian:A=-3,s=2",
        ] {
            let d = parse_potential(text).unwrap();
            let canon = d.to_string();
            assert_eq!(parse_potential(&canon).unwrap(), d, "round-trip failed for {text}");
        }
        // defaults and spacing
        assert_eq!(
            parse_potential("gaussian").unwrap(),
            PotentialDescriptor::Gaussian { amplitude: 1.0, width: 1.0 }
        );
        assert_eq!(
            parse_potential("  box: R = 2 , A = 3 ").unwrap(),
            PotentialDescriptor::BoxWell { amplitude: 3.0, radius: 2.0 }
        );
    }

    #[test]
    fn parse_errors_carry_byte_positions() {
        assert_eq!(parse_err_at(""), 0);
        assert_eq!(parse_err_at("triangle:A=1"), 0);
        // offset of the bad value: "gaussian:A=" is 11 bytes
        assert_eq!(parse_err_at("gaussian:A=oops"), 11);
        // offset of the unknown key after the first assignment
        assert_eq!(parse_err_at("gaussian:A=1,q=2"), 13);
        assert_eq!(parse_err_at("gaussian:A=1,A=2"), 13);
        // zero width rejected at its value position
        assert_eq!(parse_err_at("gaussian:s=0"), 11);
        assert_eq!(parse_err_at("file:"), 5);
    }

    #[test]
    fn profile_values() {
        let g = parse_potential("gaussian:A=2,s=1").unwrap();
        assert_relative_eq!(g.value(0.0), 2.0);
        assert_relative_eq!(g.value(1.0), 2.0 * (-0.5f64).exp());
        assert_relative_eq!(g.value(-1.0), g.value(1.0));

        let b = parse_potential("box:A=1,R=1").unwrap();
        assert_relative_eq!(b.value(0.999), 1.0);
        assert_relative_eq!(b.value(1.0), 0.5); // half value at the jump
        assert_abs_diff_eq!(b.value(1.0000001), 0.0);

        let m = parse_potential("mix:A1=1,s1=1,A2=0.25,s2=2").unwrap();
        assert_relative_eq!(m.value(0.0), 0.75);

        let h = parse_potential("hardy:A=1").unwrap();
        assert_relative_eq!(h.value(0.0), 1.0);
        assert_relative_eq!(h.value(0.5), 1.0);
        assert_relative_eq!(h.value(2.0), 0.25);
    }

    #[test]
    fn analytic_integrals() {
        let g = PotentialDescriptor::Gaussian { amplitude: 1.0, width: 1.0 };
        assert_relative_eq!(g.analytic_integral(1).unwrap(), (2.0 * std::f64::consts::PI).sqrt(), max_relative = 1e-15);
        assert_relative_eq!(g.analytic_integral(2).unwrap(), 2.0 * std::f64::consts::PI, max_relative = 1e-15);

        let b = PotentialDescriptor::BoxWell { amplitude: 1.0, radius: 2.0 };
        assert_relative_eq!(b.analytic_integral(2).unwrap(), 4.0 * std::f64::consts::PI, max_relative = 1e-15);
        assert_relative_eq!(b.analytic_integral(1).unwrap(), 4.0, max_relative = 1e-15);

        // the stock sign-changing example is tuned so the net mass is 1/2
        let root = (2.0 * std::f64::consts::PI).sqrt();
        let m = PotentialDescriptor::Mix { a1: 1.0, s1: 1.0, a2: (root - 0.5) / (2.0 * root), s2: 2.0 };
        assert_relative_eq!(m.analytic_integral(1).unwrap(), 0.5, max_relative = 1e-12);

        let h = PotentialDescriptor::Hardy { amplitude: 0.5 };
        assert_relative_eq!(h.analytic_integral(1).unwrap(), 2.0);
        assert!(h.analytic_integral(2).is_none());
        assert!(h.analytic_integral(3).is_none());
    }

    #[test]
    fn quadrature_agrees_with_analytic_integrals() {
        let desc = parse_potential("gaussian:A=1.3,s=0.7").unwrap();
        let g = std::sync::Arc::new(build_grid(GridSpec::line(8193, 12.0)).unwrap());
        let samples: Vec<f64> = g.nodes.iter().map(|&x| desc.value(x)).collect();
        assert_relative_eq!(
            quadrature(&g, &samples).unwrap(),
            desc.analytic_integral(1).unwrap(),
            max_relative = 1e-7
        );

        let r = std::sync::Arc::new(build_grid(GridSpec::radial(3, 8193, 10.0)).unwrap());
        let samples: Vec<f64> = r.nodes.iter().map(|&x| desc.value(x)).collect();
        assert_relative_eq!(
            quadrature(&r, &samples).unwrap(),
            desc.analytic_integral(3).unwrap(),
            max_relative = 1e-6
        );
    }

    #[test]
    fn file_potentials_interpolate_and_validate() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("well.csv");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "# tent profile").unwrap();
        writeln!(f, "0, 1").unwrap();
        writeln!(f, "1, 0.5").unwrap();
        writeln!(f, "2, 0").unwrap();
        drop(f);

        let text = format!("file:{}", path.display());
        let d = parse_potential(&text).unwrap();
        assert_relative_eq!(d.value(0.5), 0.75);
        assert_relative_eq!(d.value(1.5), 0.25);
        assert_abs_diff_eq!(d.value(3.0), 0.0);
        assert_eq!(d.to_string(), text);
        assert_eq!(parse_potential(&text).unwrap(), d);
        assert!(d.analytic_integral(1).is_none());
        assert_relative_eq!(d.resolution_scale(), 1.0);
        assert_relative_eq!(d.extent_scale(), 2.0);

        assert!(matches!(parse_potential("file:/no/such/file.csv"), Err(Error::Io(_))));

        let bad = dir.path().join("bad.csv");
        std::fs::write(&bad, "0 1\nnope nope\n").unwrap();
        assert!(matches!(parse_potential(&format!("file:{}", bad.display())), Err(Error::Parse { .. })));

        let short = dir.path().join("short.csv");
        std::fs::write(&short, "0 1\n").unwrap();
        assert!(matches!(parse_potential(&format!("file:{}", short.display())), Err(Error::Parse { .. })));
    }

    #[test]
    fn scales() {
        assert_relative_eq!(parse_potential("gaussian:s=0.3").unwrap().resolution_scale(), 0.3);
        assert_relative_eq!(parse_potential("mix:s1=1,s2=2").unwrap().resolution_scale(), 1.0);
        assert_relative_eq!(parse_potential("mix:s1=1,s2=2").unwrap().extent_scale(), 2.0);
        assert_relative_eq!(parse_potential("hardy").unwrap().extent_scale(), 1.0);
        assert_relative_eq!(parse_potential("box:R=4").unwrap().extent_scale(), 4.0);
    }
}
