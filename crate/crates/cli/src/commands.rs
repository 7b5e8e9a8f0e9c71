//! Single-point subcommands and `verify`.

use std::io::Write;
use std::path::Path;
use std::f64::consts::SQRT_2;

use serde::Serialize;
use serde_json::json;

use tiltbell::acceptance::{self, CriterionOutcome, VerifyConfig, CRITERION_COUNT};
use tiltbell::closed_form::{alt_quantum_value, max_quantum_value, LOW_CONFIDENCE_THRESHOLD};
use tiltbell::npa::{npa_solve, NpaOptions};
use tiltbell::qubit::optimal_state;
use tiltbell::tilting::{
    assignment_gap, critical_efficiency_bob, doubly_tilted_chsh, effective_chsh_value, enumerate_assignments,
    tilt_functional, DeterministicAssignment,
};
use tiltbell::{BellFunctional, CorrelatorForm, NpaLevel, SdpStatus};

use crate::output::{emit, emit_table, sink, Format};
use crate::params::{Point, PointArgs};
use crate::{CliError, CliResult};

/// Closed-form quantities at one point. Outside the violation region
/// (`α + β ≥ 2`) the maximal quantum value is the local bound and no
/// optimal qubit strategy is reported.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PointSummary {
    pub eta_a: f64,
    pub eta_b: f64,
    pub alpha: f64,
    pub beta: f64,
    pub local_bound: f64,
    pub c_q: f64,
    pub c_a: Option<f64>,
    pub c_b: Option<f64>,
    pub schmidt: Option<f64>,
    #[serde(rename = "loopholeFreeCHSH")]
    pub loophole_free_chsh: f64,
    #[serde(rename = "isoEffectiveCHSH")]
    pub iso_effective_chsh: f64,
    pub critical_eta_b: Option<f64>,
    pub in_violation_region: bool,
    pub low_confidence: bool,
}

pub fn summarize(p: Point) -> CliResult<PointSummary> {
    let t = doubly_tilted_chsh(p.eta_a, p.eta_b)?;
    let local_bound = t.tilted_local_bound();
    let (c_q, strategy) = if p.alpha + p.beta < 2.0 {
        (max_quantum_value(p.alpha, p.beta)?, Some(optimal_state(p.alpha, p.beta)?))
    } else {
        (local_bound, None)
    };
    let iso = effective_chsh_value(2.0 * SQRT_2, t.assignment(), p.eta_a, p.eta_b)?;
    Ok(PointSummary {
        eta_a: p.eta_a,
        eta_b: p.eta_b,
        alpha: p.alpha,
        beta: p.beta,
        local_bound,
        c_q,
        c_a: strategy.as_ref().map(|s| s.c_a),
        c_b: strategy.as_ref().map(|s| s.c_b),
        schmidt: strategy.as_ref().map(|s| s.schmidt),
        loophole_free_chsh: t.effective_value(c_q)?,
        iso_effective_chsh: iso,
        critical_eta_b: critical_efficiency_bob(p.eta_a).ok(),
        in_violation_region: t.in_violation_region(),
        low_confidence: p.alpha + p.beta > LOW_CONFIDENCE_THRESHOLD,
    })
}

pub fn report(point: &PointArgs, format: Format, out: Option<&Path>) -> CliResult<()> {
    emit(&summarize(point.resolve()?)?, format, out)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct QValue {
    alpha: f64,
    beta: f64,
    c_q: f64,
    c_a: Option<f64>,
    c_b: Option<f64>,
    schmidt: Option<f64>,
    local_bound: f64,
    #[serde(rename = "loopholeFreeCHSH")]
    loophole_free_chsh: f64,
}

pub fn qvalue(point: &PointArgs, format: Format, out: Option<&Path>) -> CliResult<()> {
    let s = summarize(point.resolve()?)?;
    let q = QValue {
        alpha: s.alpha,
        beta: s.beta,
        c_q: s.c_q,
        c_a: s.c_a,
        c_b: s.c_b,
        schmidt: s.schmidt,
        local_bound: s.local_bound,
        loophole_free_chsh: s.loophole_free_chsh,
    };
    emit(&q, format, out)
}

pub fn strategy(point: &PointArgs, format: Format, out: Option<&Path>) -> CliResult<()> {
    let p = point.resolve()?;
    emit(&optimal_state(p.alpha, p.beta)?, format, out)
}

fn parse_assignment(bits: &str) -> CliResult<DeterministicAssignment> {
    let parsed: Vec<u8> = bits
        .split(',')
        .map(|b| b.trim().parse::<u8>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("invalid assignment '{bits}' (expected four bits s_A,s_B,r_A,r_B)")))?;
    match parsed[..] {
        [s_a, s_b, r_a, r_b] => Ok(DeterministicAssignment::from_bits(s_a, s_b, r_a, r_b)?),
        _ => Err(CliError::Usage(format!(
            "invalid assignment '{bits}' (expected four bits s_A,s_B,r_A,r_B)"
        ))),
    }
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct AssignmentBits {
    s_a: u8,
    s_b: u8,
    r_a: u8,
    r_b: u8,
}

impl AssignmentBits {
    fn of(q: &DeterministicAssignment) -> Self {
        let (s_a, s_b, r_a, r_b) = q.bits().expect("CHSH assignment");
        AssignmentBits { s_a, s_b, r_a, r_b }
    }
}

/// `coeffs[x][y][a][b]`, outcome index 0 meaning `+1`.
fn coefficient_tensor(f: &BellFunctional) -> Vec<Vec<Vec<Vec<f64>>>> {
    let s = f.scenario();
    (0..s.m_a)
        .map(|x| {
            (0..s.m_b)
                .map(|y| (0..s.d_a).map(|a| (0..s.d_b).map(|b| f.coeff(a, b, x, y)).collect()).collect())
                .collect()
        })
        .collect()
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct TiltDoc {
    eta_a: f64,
    eta_b: f64,
    assignment: AssignmentBits,
    parity_class: u8,
    alpha: f64,
    beta: f64,
    tilted_local_bound: f64,
    loophole_free_threshold: f64,
    in_violation_region: bool,
    correlator_form: CorrelatorForm,
    coefficients: Vec<Vec<Vec<Vec<f64>>>>,
}

pub fn tilt(point: &PointArgs, bits: &str, format: Format, out: Option<&Path>) -> CliResult<()> {
    let p = point.resolve()?;
    let q = parse_assignment(bits)?;
    let t = tilt_functional(&BellFunctional::chsh(), &q, p.eta_a, p.eta_b)?;
    let doc = TiltDoc {
        eta_a: p.eta_a,
        eta_b: p.eta_b,
        assignment: AssignmentBits::of(&q),
        parity_class: q.parity_class().expect("CHSH assignment"),
        alpha: t.alpha(),
        beta: t.beta(),
        tilted_local_bound: t.tilted_local_bound(),
        loophole_free_threshold: t.loophole_free_threshold(),
        in_violation_region: t.in_violation_region(),
        correlator_form: t.functional().correlator_form()?,
        coefficients: coefficient_tensor(t.functional()),
    };
    emit(&doc, format, out)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct AssignmentRow {
    #[serde(flatten)]
    bits: AssignmentBits,
    parity_class: u8,
    tilted_local_bound: f64,
    loophole_free_threshold: f64,
    c_q: Option<f64>,
    #[serde(rename = "effectiveCHSH")]
    effective_chsh: Option<f64>,
}

pub fn assignments(point: &PointArgs, format: Format, out: Option<&Path>) -> CliResult<()> {
    let p = point.resolve()?;
    let inside = p.alpha + p.beta < 2.0;
    let (c_same, c_alt) = if inside {
        (
            Some(max_quantum_value(p.alpha, p.beta)?),
            Some(alt_quantum_value(p.alpha, p.beta)?),
        )
    } else {
        (None, None)
    };
    let chsh = BellFunctional::chsh();
    let mut rows = Vec::with_capacity(16);
    for q in enumerate_assignments() {
        let t = tilt_functional(&chsh, &q, p.eta_a, p.eta_b)?;
        let class = q.parity_class().expect("CHSH assignment");
        let c_q = if class == 0 { c_same } else { c_alt };
        rows.push(AssignmentRow {
            bits: AssignmentBits::of(&q),
            parity_class: class,
            tilted_local_bound: t.tilted_local_bound(),
            loophole_free_threshold: t.loophole_free_threshold(),
            c_q,
            effective_chsh: c_q.map(|c| effective_chsh_value(c, &q, p.eta_a, p.eta_b)).transpose()?,
        });
    }
    let delta = if inside { Some(assignment_gap(p.eta_a, p.eta_b)?.delta) } else { None };
    let meta = json!({
        "etaA": p.eta_a,
        "etaB": p.eta_b,
        "alpha": p.alpha,
        "beta": p.beta,
        "delta": delta,
    });
    emit_table("assignments", meta, &rows, format, out)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct NpaDoc {
    alpha: f64,
    beta: f64,
    level: NpaLevel,
    moment_matrix_size: usize,
    upper_bound: f64,
    attained: f64,
    duality_gap: f64,
    iterations: usize,
    status: SdpStatus,
    primal_residual: f64,
    c_q: Option<f64>,
    gap_to_closed_form: Option<f64>,
}

pub fn npa(
    point: &PointArgs,
    level: &str,
    tol: f64,
    allow_high_level: bool,
    format: Format,
    out: Option<&Path>,
) -> CliResult<()> {
    let p = point.resolve()?;
    let level: NpaLevel = level.parse()?;
    let r = npa_solve(p.alpha, p.beta, level, NpaOptions { tol, allow_high_level })?;
    let c_q = if p.alpha + p.beta < 2.0 {
        Some(max_quantum_value(p.alpha, p.beta)?)
    } else {
        None
    };
    let doc = NpaDoc {
        alpha: p.alpha,
        beta: p.beta,
        level,
        moment_matrix_size: r.moment_matrix.len(),
        upper_bound: r.upper_bound,
        attained: r.attained,
        duality_gap: r.duality_gap,
        iterations: r.iterations,
        status: r.status,
        primal_residual: r.primal_residual,
        c_q,
        gap_to_closed_form: c_q.map(|c| r.upper_bound - c),
    };
    emit(&doc, format, out)
}

pub fn verify(cfg: &VerifyConfig, only: &[u8], json: bool, out: Option<&Path>) -> CliResult<()> {
    let outcomes: Vec<CriterionOutcome> = if only.is_empty() {
        acceptance::run_all(cfg)
    } else {
        only.iter()
            .map(|&id| {
                acceptance::run(id, cfg).ok_or_else(|| {
                    CliError::Usage(format!("unknown criterion {id} (expected 1..={CRITERION_COUNT})"))
                })
            })
            .collect::<CliResult<_>>()?
    };
    let passed = outcomes.iter().filter(|o| o.passed).count();
    let total = outcomes.len();
    let mut w = sink(out)?;
    if json {
        let doc = json!({
            "schemaVersion": crate::output::SCHEMA_VERSION,
            "passed": passed,
            "total": total,
            "criteria": outcomes,
        });
        serde_json::to_writer_pretty(&mut w, &doc).map_err(std::io::Error::from)?;
        writeln!(w)?;
    } else {
        for o in &outcomes {
            writeln!(w, "{o}")?;
        }
        writeln!(w, "{passed}/{total} criteria passed")?;
    }
    w.flush()?;
    if passed == total {
        Ok(())
    } else {
        Err(CliError::Acceptance { passed, total })
    }
}
