//! Grid scans: `scan` over the efficiency or tilt plane and `npa-map` over
//! the tilt triangle. Points are evaluated in parallel and written in
//! row-major order; a failing point produces a row with a status message
//! instead of aborting the scan.

use std::path::Path;

use clap::{Args, ValueEnum};
use rayon::prelude::*;

use tiltbell::npa::{min_tight_level_with, NpaOptions};
use tiltbell::tilting::assignment_gap;
use tiltbell::NpaLevel;

use crate::commands::{summarize, PointSummary};
use crate::output::{real, sink};
use crate::params::Point;
use crate::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Plane {
    /// Axes (etaA, etaB); defaults [0.5, 1] x [0.5, 1].
    #[value(name = "eta-plane", alias = "eta")]
    Eta,
    /// Axes (alpha, beta); defaults [0, 2] x [0, 2].
    #[value(name = "alpha-plane", alias = "alpha")]
    Alpha,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Output {
    /// Maximal quantum value of the tilted functional.
    #[value(name = "cQ")]
    CQ,
    /// Maximal loophole-free CHSH value.
    #[value(name = "loopholeFreeCHSH")]
    LoopholeFree,
    /// Optimal cosines cA, cB.
    #[value(name = "cosines")]
    Cosines,
    /// Larger Schmidt coefficient of the optimal state.
    #[value(name = "schmidt")]
    Schmidt,
    /// Minimum tight NPA level.
    #[value(name = "npaLevel")]
    NpaLevel,
    /// Gap between the two assignment classes.
    #[value(name = "delta")]
    Delta,
}

impl Output {
    fn columns(self) -> &'static [&'static str] {
        match self {
            Output::CQ => &["cQ"],
            Output::LoopholeFree => &["loopholeFreeCHSH"],
            Output::Cosines => &["cA", "cB"],
            Output::Schmidt => &["schmidt"],
            Output::NpaLevel => &["npaLevel"],
            Output::Delta => &["delta"],
        }
    }
}

#[derive(Debug, Args)]
pub struct ScanCmd {
    /// Parameter plane.
    #[arg(long, value_enum, default_value = "eta-plane")]
    plane: Plane,
    /// Grid points per axis (at least 2).
    #[arg(long, default_value_t = 50)]
    grid: usize,
    /// First-axis lower end [default: 0.5 (eta-plane) or 0 (alpha-plane)].
    #[arg(long, allow_negative_numbers = true)]
    x_min: Option<f64>,
    /// First-axis upper end [default: 1 (eta-plane) or 2 (alpha-plane)].
    #[arg(long, allow_negative_numbers = true)]
    x_max: Option<f64>,
    /// Second-axis lower end [default: as --x-min].
    #[arg(long, allow_negative_numbers = true)]
    y_min: Option<f64>,
    /// Second-axis upper end [default: as --x-max].
    #[arg(long, allow_negative_numbers = true)]
    y_max: Option<f64>,
    /// Alpha-plane only: explicit beta values instead of a beta grid; the entry
    /// `alpha` means beta = alpha (e.g. `alpha,0.1,0.01,0`) [default: grid].
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    beta_values: Vec<String>,
    /// Columns to emit.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "cQ,loopholeFreeCHSH")]
    outputs: Vec<Output>,
    /// Highest NPA level tried for the npaLevel column.
    #[arg(long, default_value = "3")]
    max_level: String,
    /// A level is tight when its bound is within this of the closed-form value.
    #[arg(long, default_value_t = 1e-6)]
    gap_tol: f64,
    /// SDP solver tolerance.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Debug, Args)]
pub struct NpaMapCmd {
    /// Grid steps per axis; points are alpha = i*alphaMax/N, beta = j*betaMax/N with alpha + beta < 2.
    #[arg(long, default_value_t = 10)]
    grid: usize,
    /// Upper end of the alpha axis.
    #[arg(long, default_value_t = 2.0)]
    alpha_max: f64,
    /// Upper end of the beta axis.
    #[arg(long, default_value_t = 2.0)]
    beta_max: f64,
    /// Highest level tried: 1, 1+AB, 2, 3, ...
    #[arg(long, default_value = "3")]
    max_level: String,
    /// A level is tight when its bound is within this of the closed-form value.
    #[arg(long, default_value_t = 1e-6)]
    gap_tol: f64,
    /// SDP solver tolerance.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Either a fixed second coordinate or one tied to the first.
#[derive(Debug, Clone, Copy)]
enum Second {
    Value(f64),
    SameAsFirst,
}

fn parse_beta_values(list: &[String]) -> CliResult<Vec<Second>> {
    list.iter()
        .map(|s| {
            let t = s.trim();
            if t.eq_ignore_ascii_case("alpha") {
                Ok(Second::SameAsFirst)
            } else {
                t.parse()
                    .map(Second::Value)
                    .map_err(|_| CliError::Usage(format!("invalid beta value '{s}' (a number or 'alpha')")))
            }
        })
        .collect()
}

fn check_range(name: &str, lo: f64, hi: f64) -> CliResult<()> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(CliError::Usage(format!("invalid {name} range [{lo}, {hi}]")));
    }
    Ok(())
}

struct Row {
    coords: [f64; 2],
    point: Option<Point>,
    cells: Vec<String>,
    status: String,
}

struct ScanSettings {
    outputs: Vec<Output>,
    max_level: NpaLevel,
    gap_tol: f64,
    opts: NpaOptions,
}

fn opt_real(v: Option<f64>) -> String {
    v.map(real).unwrap_or_default()
}

fn evaluate(plane: Plane, coords: [f64; 2], s: &ScanSettings) -> Row {
    let width: usize = s.outputs.iter().map(|o| o.columns().len()).sum();
    let point = match plane {
        Plane::Eta => Point::from_efficiencies(coords[0], coords[1]),
        Plane::Alpha => Point::from_tilts(coords[0], coords[1]),
    };
    let fail = |e: CliError, point: Option<Point>| Row {
        coords,
        point,
        cells: vec![String::new(); width],
        status: format!("error: {e}"),
    };
    let p = match point {
        Ok(p) => p,
        Err(e) => return fail(e, None),
    };
    let summary: PointSummary = match summarize(p) {
        Ok(v) => v,
        Err(e) => return fail(e, Some(p)),
    };
    let inside = p.alpha + p.beta < 2.0;
    let mut status = if !inside {
        "no-violation".to_string()
    } else if summary.low_confidence {
        "low-confidence".to_string()
    } else {
        "ok".to_string()
    };
    let mut note = |e: CliError| {
        if !status.starts_with("error") {
            status = format!("error: {e}");
        }
    };
    let mut cells = Vec::with_capacity(width);
    for o in &s.outputs {
        match o {
            Output::CQ => cells.push(real(summary.c_q)),
            Output::LoopholeFree => cells.push(real(summary.loophole_free_chsh)),
            Output::Cosines => {
                cells.push(opt_real(summary.c_a));
                cells.push(opt_real(summary.c_b));
            }
            Output::Schmidt => cells.push(opt_real(summary.schmidt)),
            Output::NpaLevel => cells.push(if inside {
                match min_tight_level_with(p.alpha, p.beta, s.gap_tol, s.max_level, s.opts) {
                    Ok(l) => l.map_or_else(|| "none".to_string(), |l| l.to_string()),
                    Err(e) => {
                        note(e.into());
                        String::new()
                    }
                }
            } else {
                String::new()
            }),
            Output::Delta => cells.push(if inside {
                match assignment_gap(p.eta_a, p.eta_b) {
                    Ok(g) => real(g.delta),
                    Err(e) => {
                        note(e.into());
                        String::new()
                    }
                }
            } else {
                String::new()
            }),
        }
    }
    Row {
        coords,
        point: Some(p),
        cells,
        status,
    }
}

pub fn scan(cmd: &ScanCmd, out: Option<&Path>) -> CliResult<()> {
    if cmd.grid < 2 {
        return Err(CliError::Usage(format!("--grid must be at least 2, got {}", cmd.grid)));
    }
    if cmd.outputs.is_empty() {
        return Err(CliError::Usage("--outputs must name at least one column".into()));
    }
    let (lo, hi) = match cmd.plane {
        Plane::Eta => (0.5, 1.0),
        Plane::Alpha => (0.0, 2.0),
    };
    let (x_lo, x_hi) = (cmd.x_min.unwrap_or(lo), cmd.x_max.unwrap_or(hi));
    let (y_lo, y_hi) = (cmd.y_min.unwrap_or(lo), cmd.y_max.unwrap_or(hi));
    check_range("x", x_lo, x_hi)?;
    check_range("y", y_lo, y_hi)?;

    let seconds: Vec<Second> = if cmd.beta_values.is_empty() {
        linspace(y_lo, y_hi, cmd.grid).into_iter().map(Second::Value).collect()
    } else {
        if cmd.plane != Plane::Alpha {
            return Err(CliError::Usage("--beta-values applies to the alpha-plane only".into()));
        }
        parse_beta_values(&cmd.beta_values)?
    };
    let mut coords = Vec::with_capacity(cmd.grid * seconds.len());
    for x in linspace(x_lo, x_hi, cmd.grid) {
        for s in &seconds {
            let y = match *s {
                Second::Value(v) => v,
                Second::SameAsFirst => x,
            };
            coords.push([x, y]);
        }
    }

    let settings = ScanSettings {
        outputs: cmd.outputs.clone(),
        max_level: cmd.max_level.parse()?,
        gap_tol: cmd.gap_tol,
        opts: NpaOptions {
            tol: cmd.tol,
            allow_high_level: false,
        },
    };
    let rows: Vec<Row> = coords.par_iter().map(|&c| evaluate(cmd.plane, c, &settings)).collect();

    let mut header = match cmd.plane {
        Plane::Eta => vec!["etaA", "etaB", "alpha", "beta"],
        Plane::Alpha => vec!["alpha", "beta", "etaA", "etaB"],
    };
    header.extend(settings.outputs.iter().flat_map(|o| o.columns().iter().copied()));
    header.push("status");

    let mut w = csv::Writer::from_writer(sink(out)?);
    w.write_record(&header)?;
    for r in rows {
        let derived = match (cmd.plane, r.point) {
            (_, None) => [String::new(), String::new()],
            (Plane::Eta, Some(p)) => [real(p.alpha), real(p.beta)],
            (Plane::Alpha, Some(p)) => [real(p.eta_a), real(p.eta_b)],
        };
        let mut record = vec![real(r.coords[0]), real(r.coords[1])];
        record.extend(derived);
        record.extend(r.cells);
        record.push(r.status);
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn npa_map(cmd: &NpaMapCmd, out: Option<&Path>) -> CliResult<()> {
    if cmd.grid < 2 {
        return Err(CliError::Usage(format!("--grid must be at least 2, got {}", cmd.grid)));
    }
    check_range("alpha", 0.0, cmd.alpha_max)?;
    check_range("beta", 0.0, cmd.beta_max)?;
    let max_level: NpaLevel = cmd.max_level.parse()?;
    let opts = NpaOptions {
        tol: cmd.tol,
        allow_high_level: false,
    };
    let n = cmd.grid;
    let points: Vec<(f64, f64)> = (0..=n)
        .flat_map(|i| (0..=n).map(move |j| (i, j)))
        .map(|(i, j)| (cmd.alpha_max * i as f64 / n as f64, cmd.beta_max * j as f64 / n as f64))
        .filter(|(a, b)| a + b < 2.0 - 1e-12)
        .collect();
    let rows: Vec<(String, String)> = points
        .par_iter()
        .map(|&(a, b)| match min_tight_level_with(a, b, cmd.gap_tol, max_level, opts) {
            Ok(Some(l)) => (l.to_string(), "ok".to_string()),
            Ok(None) => ("none".to_string(), "ok".to_string()),
            Err(e) => (String::new(), format!("error: {}", CliError::from(e))),
        })
        .collect();

    let mut w = csv::Writer::from_writer(sink(out)?);
    w.write_record(["alpha", "beta", "minTightLevel", "status"])?;
    for (&(a, b), (level, status)) in points.iter().zip(rows) {
        w.write_record([real(a), real(b), level, status])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_ends() {
        let v = linspace(0.5, 1.0, 6);
        assert_eq!(v.len(), 6);
        assert_eq!(v[0], 0.5);
        assert_eq!(v[5], 1.0);
    }

    #[test]
    fn beta_values_parse() {
        let v = parse_beta_values(&["alpha".into(), "0.1".into()]).unwrap();
        assert!(matches!(v[0], Second::SameAsFirst));
        assert!(matches!(v[1], Second::Value(x) if x == 0.1));
        assert!(parse_beta_values(&["x".into()]).is_err());
    }
}
