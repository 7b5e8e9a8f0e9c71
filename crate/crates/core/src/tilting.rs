//! Tilted Bell functionals induced by inefficient detectors.
//!
//! For a deterministic assignment `q̄` and efficiencies `η_A, η_B`, the
//! effective value of a functional `β` satisfies
//! `β(p̃) = η_Aη_B β_{η_A,η_B}(p) + (1-η_A)(1-η_B) β(q̄)`, where the tilted
//! functional adds single-party terms weighted by `(1-η)/η`. Maximizing the
//! loophole-free violation therefore reduces to maximizing the tilted
//! functional over ideal quantum behaviors.

use serde::Serialize;

use crate::bell::{Behavior, BellFunctional, Scenario};
use crate::closed_form;
use crate::error::{Error, Result};

/// Deterministic local assignment `q̄(ab|xy) = δ_{a,a_x} δ_{b,b_y}` (outcome indices).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct DeterministicAssignment {
    pub ax: Vec<usize>,
    pub by: Vec<usize>,
}

impl DeterministicAssignment {
    pub fn new(ax: Vec<usize>, by: Vec<usize>) -> Self {
        DeterministicAssignment { ax, by }
    }

    /// CHSH assignment with `⟨A_x⟩ = (-1)^{r_A x + s_A}` and `⟨B_y⟩ = (-1)^{r_B y + s_B}`.
    pub fn from_bits(s_a: u8, s_b: u8, r_a: u8, r_b: u8) -> Result<Self> {
        if [s_a, s_b, r_a, r_b].iter().any(|&b| b > 1) {
            return Err(Error::InvalidArgument(format!(
                "assignment bits must be 0 or 1, got ({s_a},{s_b},{r_a},{r_b})"
            )));
        }
        let ax = (0..2).map(|x| ((r_a as usize) * x + s_a as usize) % 2).collect();
        let by = (0..2).map(|y| ((r_b as usize) * y + s_b as usize) % 2).collect();
        Ok(DeterministicAssignment { ax, by })
    }

    /// `(s_A, s_B, r_A, r_B)` for CHSH-scenario assignments.
    pub fn bits(&self) -> Option<(u8, u8, u8, u8)> {
        if self.ax.len() != 2 || self.by.len() != 2 || self.ax.iter().chain(&self.by).any(|&o| o > 1) {
            return None;
        }
        let s_a = self.ax[0] as u8;
        let s_b = self.by[0] as u8;
        Some((s_a, s_b, self.ax[1] as u8 ^ s_a, self.by[1] as u8 ^ s_b))
    }

    /// `s_A + s_B + r_A r_B mod 2`; class 0 contains the all-`+1` assignment.
    pub fn parity_class(&self) -> Option<u8> {
        self.bits().map(|(sa, sb, ra, rb)| (sa + sb + ra * rb) % 2)
    }

    pub fn behavior(&self, scenario: Scenario) -> Result<Behavior> {
        Behavior::deterministic(scenario, &self.ax, &self.by)
    }
}

/// A functional tilted about a deterministic assignment.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TiltedFunctional {
    #[serde(skip)]
    base: BellFunctional,
    #[serde(skip)]
    functional: BellFunctional,
    assignment: DeterministicAssignment,
    eta_a: f64,
    eta_b: f64,
    alpha: f64,
    beta: f64,
    tilted_local_bound: f64,
    loophole_free_threshold: f64,
    in_violation_region: bool,
}

impl TiltedFunctional {
    pub fn base(&self) -> &BellFunctional {
        &self.base
    }

    /// The tilted coefficient tensor.
    pub fn functional(&self) -> &BellFunctional {
        &self.functional
    }

    pub fn assignment(&self) -> &DeterministicAssignment {
        &self.assignment
    }

    pub fn eta_a(&self) -> f64 {
        self.eta_a
    }

    pub fn eta_b(&self) -> f64 {
        self.eta_b
    }

    /// Magnitude of the tilt on Alice's marginals. For CHSH this is
    /// `2(1-η_B)/η_B`; outside the CHSH scenario it is the weight `(1-η_B)/η_B`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Magnitude of the tilt on Bob's marginals (`2(1-η_A)/η_A` for CHSH).
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Local bound of the tilted coefficients, by vertex enumeration.
    pub fn tilted_local_bound(&self) -> f64 {
        self.tilted_local_bound
    }

    /// `β_L/(η_Aη_B) − β(q̄)(1−η_A)(1−η_B)/(η_Aη_B)`: the tilted value above which
    /// the effective behavior violates the original inequality.
    pub fn loophole_free_threshold(&self) -> f64 {
        self.loophole_free_threshold
    }

    /// Whether `(η_A, η_B)` lies in the region `η_B > η_A/(3η_A − 1)` where
    /// a loophole-free CHSH violation is possible. Construction succeeds either way.
    pub fn in_violation_region(&self) -> bool {
        self.in_violation_region
    }

    /// Effective value of the base functional given a value `tilted_value`
    /// of the tilted functional.
    pub fn effective_value(&self, tilted_value: f64) -> Result<f64> {
        let q = self.assignment.behavior(self.base.scenario())?;
        let qv = self.base.evaluate(&q)?;
        Ok(self.eta_a * self.eta_b * tilted_value + (1.0 - self.eta_a) * (1.0 - self.eta_b) * qv)
    }
}

fn check_positive_efficiency(name: &'static str, value: f64) -> Result<()> {
    if !(value <= 1.0) {
        return Err(Error::EfficiencyOutOfRange { name, value });
    }
    if !(value > 0.0) {
        return Err(Error::ZeroEfficiency { name, value });
    }
    Ok(())
}

/// `α(η) = (1 − η)/η`.
fn inefficiency_weight(eta: f64) -> f64 {
    (1.0 - eta) / eta
}

/// Whether `η_B > η_A/(3η_A − 1)` with `η_A > 1/2`, equivalently `α + β < 2`.
pub fn in_violation_region(eta_a: f64, eta_b: f64) -> bool {
    eta_a > 0.5 && eta_b > eta_a / (3.0 * eta_a - 1.0)
}

/// CHSH tilts `(α, β) = (2(1−η_B)/η_B, 2(1−η_A)/η_A)`.
pub fn tilts_from_efficiencies(eta_a: f64, eta_b: f64) -> Result<(f64, f64)> {
    check_positive_efficiency("eta_A", eta_a)?;
    check_positive_efficiency("eta_B", eta_b)?;
    Ok((2.0 * inefficiency_weight(eta_b), 2.0 * inefficiency_weight(eta_a)))
}

/// Inverse of [`tilts_from_efficiencies`]: `η_A = 2/(2+β)`, `η_B = 2/(2+α)`.
pub fn efficiencies_from_tilts(alpha: f64, beta: f64) -> Result<(f64, f64)> {
    for (name, v) in [("alpha", alpha), ("beta", beta)] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::TiltOutOfRange {
                name,
                value: v,
                range: "[0, inf)",
            });
        }
    }
    Ok((2.0 / (2.0 + beta), 2.0 / (2.0 + alpha)))
}

/// Tilts `f` about the deterministic assignment `qbar`.
///
/// Alice's marginal term has coefficients `β^A_{ax} = Σ_y β_{a b_y x y}` with
/// weight `(1−η_B)/η_B`, Bob's has `β^B_{by} = Σ_x β_{a_x b x y}` with weight
/// `(1−η_A)/η_A`. Marginal terms are written into the joint table spread
/// evenly over the other party's inputs.
pub fn tilt_functional(
    f: &BellFunctional,
    qbar: &DeterministicAssignment,
    eta_a: f64,
    eta_b: f64,
) -> Result<TiltedFunctional> {
    check_positive_efficiency("eta_A", eta_a)?;
    check_positive_efficiency("eta_B", eta_b)?;
    let s = f.scenario();
    let q = qbar.behavior(s)?;
    let (wa, wb) = (inefficiency_weight(eta_b), inefficiency_weight(eta_a));

    let mut beta_a = vec![vec![0.0; s.d_a]; s.m_a];
    for (x, row) in beta_a.iter_mut().enumerate() {
        for (a, slot) in row.iter_mut().enumerate() {
            *slot = (0..s.m_b).map(|y| f.coeff(a, qbar.by[y], x, y)).sum();
        }
    }
    let mut beta_b = vec![vec![0.0; s.d_b]; s.m_b];
    for (y, row) in beta_b.iter_mut().enumerate() {
        for (b, slot) in row.iter_mut().enumerate() {
            *slot = (0..s.m_a).map(|x| f.coeff(qbar.ax[x], b, x, y)).sum();
        }
    }

    let mut coeffs = f.coeffs().to_vec();
    for x in 0..s.m_a {
        for y in 0..s.m_b {
            for a in 0..s.d_a {
                for b in 0..s.d_b {
                    coeffs[s.index(x, y, a, b)] +=
                        wa * beta_a[x][a] / s.m_b as f64 + wb * beta_b[y][b] / s.m_a as f64;
                }
            }
        }
    }
    let functional = BellFunctional::new(s, coeffs)?;

    let (alpha, beta) = if s.is_chsh() {
        let form = functional.correlator_form()?;
        let base = f.correlator_form()?;
        let da = (0..2).map(|x| (form.alice[x] - base.alice[x]).abs()).fold(0.0, f64::max);
        let db = (0..2).map(|y| (form.bob[y] - base.bob[y]).abs()).fold(0.0, f64::max);
        (da, db)
    } else {
        (wa, wb)
    };

    let eff = eta_a * eta_b;
    let threshold = (f.local_bound() - f.evaluate(&q)? * (1.0 - eta_a) * (1.0 - eta_b)) / eff;

    Ok(TiltedFunctional {
        base: f.clone(),
        tilted_local_bound: functional.local_bound(),
        functional,
        assignment: qbar.clone(),
        eta_a,
        eta_b,
        alpha,
        beta,
        loophole_free_threshold: threshold,
        in_violation_region: in_violation_region(eta_a, eta_b),
    })
}

/// `C + (2/η_B)(1−η_B)⟨A_0⟩ + (2/η_A)(1−η_A)⟨B_0⟩ ≤ 2[1/η_A + 1/η_B − 1]`.
pub fn doubly_tilted_chsh(eta_a: f64, eta_b: f64) -> Result<TiltedFunctional> {
    assignment_tilted_chsh(0, 0, 0, 0, eta_a, eta_b)
}

/// CHSH tilted about the assignment labelled by `(s_A, s_B, r_A, r_B)`: the
/// tilt on Alice sits on `⟨A_{r_B}⟩` with sign `(-1)^{s_B}`, the tilt on Bob on
/// `⟨B_{r_A}⟩` with sign `(-1)^{s_A}`.
pub fn assignment_tilted_chsh(
    s_a: u8,
    s_b: u8,
    r_a: u8,
    r_b: u8,
    eta_a: f64,
    eta_b: f64,
) -> Result<TiltedFunctional> {
    let qbar = DeterministicAssignment::from_bits(s_a, s_b, r_a, r_b)?;
    let t = tilt_functional(&BellFunctional::chsh(), &qbar, eta_a, eta_b)?;
    let (alpha, beta) = tilts_from_efficiencies(eta_a, eta_b)?;
    debug_assert!((t.alpha - alpha).abs() <= 1e-12 * (1.0 + alpha));
    debug_assert!((t.beta - beta).abs() <= 1e-12 * (1.0 + beta));
    Ok(TiltedFunctional { alpha, beta, ..t })
}

/// Doubly-tilted CHSH functional `C + α⟨A_0⟩ + β⟨B_0⟩` with explicit tilts.
pub fn tilted_chsh_from_tilts(alpha: f64, beta: f64) -> Result<TiltedFunctional> {
    let (eta_a, eta_b) = efficiencies_from_tilts(alpha, beta)?;
    doubly_tilted_chsh(eta_a, eta_b)
}

/// Lower bound `η_A/(3η_A − 1)` on Bob's critical efficiency.
pub fn critical_efficiency_bob(eta_a: f64) -> Result<f64> {
    if eta_a > 1.0 || eta_a.is_nan() {
        return Err(Error::EfficiencyOutOfRange {
            name: "eta_A",
            value: eta_a,
        });
    }
    if eta_a <= 0.5 {
        return Err(Error::BelowHalf(eta_a));
    }
    Ok(eta_a / (3.0 * eta_a - 1.0))
}

/// The 16 deterministic CHSH assignments, ordered by `(s_A, s_B, r_A, r_B)`.
pub fn enumerate_assignments() -> Vec<DeterministicAssignment> {
    (0..16u8)
        .map(|k| {
            DeterministicAssignment::from_bits((k >> 3) & 1, (k >> 2) & 1, (k >> 1) & 1, k & 1)
                .expect("bits are binary")
        })
        .collect()
}

/// `η_Aη_B c_Q + 2(1−η_A)(1−η_B)(−1)^{s_A+s_B+r_Ar_B}`.
pub fn effective_chsh_value(
    c_q: f64,
    assignment: &DeterministicAssignment,
    eta_a: f64,
    eta_b: f64,
) -> Result<f64> {
    let class = assignment.parity_class().ok_or_else(|| {
        Error::InvalidArgument("effective CHSH value needs a CHSH-scenario assignment".into())
    })?;
    let sign = if class == 0 { 1.0 } else { -1.0 };
    Ok(eta_a * eta_b * c_q + 2.0 * (1.0 - eta_a) * (1.0 - eta_b) * sign)
}

/// Difference between the best effective CHSH values reachable through the
/// two parity classes of assignments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AssignmentGap {
    pub delta: f64,
    pub c_q: f64,
    pub c_q_alt: f64,
    pub in_violation_region: bool,
}

/// `Δ = η_Aη_B(c_Q − c'_Q) + 4(1−η_A)(1−η_B)`. Points outside the violation
/// region are computed anyway and flagged.
pub fn assignment_gap(eta_a: f64, eta_b: f64) -> Result<AssignmentGap> {
    let (alpha, beta) = tilts_from_efficiencies(eta_a, eta_b)?;
    let c_q = closed_form::max_quantum_value(alpha, beta)?;
    let c_q_alt = closed_form::alt_quantum_value(alpha, beta)?;
    Ok(AssignmentGap {
        delta: eta_a * eta_b * (c_q - c_q_alt) + 4.0 * (1.0 - eta_a) * (1.0 - eta_b),
        c_q,
        c_q_alt,
        in_violation_region: in_violation_region(eta_a, eta_b),
    })
}

/// Input swaps and per-input outcome flips on both sides of a `(2,2,2,2)`
/// scenario (64 elements, parties are not exchanged).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Relabeling {
    pub swap_x: bool,
    pub swap_y: bool,
    pub flip_a: [bool; 2],
    pub flip_b: [bool; 2],
}

impl Relabeling {
    pub fn all() -> impl Iterator<Item = Relabeling> {
        (0..64u8).map(|k| Relabeling {
            swap_x: k & 1 != 0,
            swap_y: k & 2 != 0,
            flip_a: [k & 4 != 0, k & 8 != 0],
            flip_b: [k & 16 != 0, k & 32 != 0],
        })
    }

    /// Image of a CHSH-scenario functional: the entry at `(x,y,a,b)` moves to
    /// the relabelled position.
    pub fn apply(&self, f: &BellFunctional) -> Result<BellFunctional> {
        let s = f.scenario();
        if !s.is_chsh() {
            return Err(Error::ScenarioMismatch {
                expected: Scenario::CHSH,
                found: s,
            });
        }
        let mut out = vec![0.0; s.len()];
        for x in 0..2 {
            for y in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        let a2 = a ^ self.flip_a[x] as usize;
                        let b2 = b ^ self.flip_b[y] as usize;
                        let x2 = x ^ self.swap_x as usize;
                        let y2 = y ^ self.swap_y as usize;
                        out[s.index(x2, y2, a2, b2)] = f.coeff(a, b, x, y);
                    }
                }
            }
        }
        BellFunctional::new(s, out)
    }
}

/// Lexicographically smallest image of `f` under [`Relabeling::all`],
/// quantized to `1e-9` so that functionals equal up to rounding compare equal.
pub fn canonical_form(f: &BellFunctional) -> Result<Vec<i64>> {
    let mut best: Option<Vec<i64>> = None;
    for g in Relabeling::all() {
        let img: Vec<i64> = g
            .apply(f)?
            .coeffs()
            .iter()
            .map(|c| (c * 1e9).round() as i64)
            .collect();
        if best.as_ref().is_none_or(|b| img < *b) {
            best = Some(img);
        }
    }
    Ok(best.expect("group is non-empty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::CorrelatorForm;
    use std::collections::HashSet;

    const ETA: f64 = 0.85;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// The tilted CHSH family written out per assignment, with the `(1−η)/η` prefactor.
    fn written_out_form(s_a: u8, s_b: u8, r_a: u8, r_b: u8, eta_a: f64, eta_b: f64) -> CorrelatorForm {
        let sign = |e: u8| if e.is_multiple_of(2) { 1.0 } else { -1.0 };
        let mut form = CorrelatorForm {
            correlators: [[1.0, 1.0], [1.0, -1.0]],
            ..Default::default()
        };
        for x in 0..2u8 {
            form.alice[x as usize] =
                (1.0 - eta_b) / eta_b * (1.0 + sign(r_b + x)) * sign(s_b);
        }
        for y in 0..2u8 {
            form.bob[y as usize] = (1.0 - eta_a) / eta_a * (1.0 + sign(r_a + y)) * sign(s_a);
        }
        form
    }

    fn form_close(f: &CorrelatorForm, g: &CorrelatorForm) -> bool {
        let mut d = (f.constant - g.constant).abs();
        for i in 0..2 {
            d = d.max((f.alice[i] - g.alice[i]).abs()).max((f.bob[i] - g.bob[i]).abs());
            for j in 0..2 {
                d = d.max((f.correlators[i][j] - g.correlators[i][j]).abs());
            }
        }
        d < 1e-12
    }

    #[test]
    fn perfect_detectors_leave_chsh_unchanged() {
        let t = doubly_tilted_chsh(1.0, 1.0).unwrap();
        assert_eq!(t.alpha(), 0.0);
        assert_eq!(t.beta(), 0.0);
        assert_eq!(t.tilted_local_bound(), 2.0);
        assert!(close(t.loophole_free_threshold(), 2.0, 1e-15));
        for (u, v) in t.functional().coeffs().iter().zip(BellFunctional::chsh().coeffs()) {
            assert!(close(*u, *v, 1e-15));
        }
    }

    #[test]
    fn symmetric_085_tilts_and_bound() {
        let t = doubly_tilted_chsh(ETA, ETA).unwrap();
        assert!(close(t.alpha(), 6.0 / 17.0, 1e-14));
        assert!(close(t.beta(), 6.0 / 17.0, 1e-14));
        assert!(close(t.tilted_local_bound(), 46.0 / 17.0, 1e-13));
        assert!(close(t.loophole_free_threshold(), 2.0 * (2.0 / ETA - 1.0), 1e-13));
        let form = t.functional().correlator_form().unwrap();
        assert!(close(form.alice[0], 6.0 / 17.0, 1e-14));
        assert!(close(form.bob[0], 6.0 / 17.0, 1e-14));
        assert!(close(form.alice[1], 0.0, 1e-15) && close(form.bob[1], 0.0, 1e-15));
    }

    #[test]
    fn one_perfect_detector() {
        let t = doubly_tilted_chsh(1.0, 2.0 / 3.0).unwrap();
        assert!(close(t.alpha(), 1.0, 1e-14));
        assert_eq!(t.beta(), 0.0);
        assert!(close(t.tilted_local_bound(), 3.0, 1e-14));
    }

    #[test]
    fn alternative_assignment_signs() {
        let t = assignment_tilted_chsh(1, 0, 0, 0, ETA, ETA).unwrap();
        let form = t.functional().correlator_form().unwrap();
        assert!(close(form.alice[0], 6.0 / 17.0, 1e-14));
        assert!(close(form.bob[0], -6.0 / 17.0, 1e-14));
        assert_eq!(t.assignment().parity_class(), Some(1));
    }

    #[test]
    fn tilts_follow_the_r_bits() {
        let t = assignment_tilted_chsh(0, 0, 1, 1, ETA, ETA).unwrap();
        let form = t.functional().correlator_form().unwrap();
        assert!(close(form.alice[0], 0.0, 1e-15) && close(form.bob[0], 0.0, 1e-15));
        assert!(close(form.alice[1], 6.0 / 17.0, 1e-14));
        assert!(close(form.bob[1], 6.0 / 17.0, 1e-14));
    }

    #[test]
    fn general_tilt_matches_written_out_family() {
        for q in enumerate_assignments() {
            let (sa, sb, ra, rb) = q.bits().unwrap();
            for &(ea, eb) in &[(0.85, 0.85), (0.7, 0.95), (1.0, 0.6)] {
                let t = assignment_tilted_chsh(sa, sb, ra, rb, ea, eb).unwrap();
                let got = t.functional().correlator_form().unwrap();
                assert!(form_close(&got, &written_out_form(sa, sb, ra, rb, ea, eb)), "{q:?}");
            }
        }
    }

    #[test]
    fn zero_efficiency_rejected() {
        assert!(matches!(
            doubly_tilted_chsh(0.0, 0.9),
            Err(Error::ZeroEfficiency { name: "eta_A", .. })
        ));
        assert!(matches!(
            doubly_tilted_chsh(0.9, 1.5),
            Err(Error::EfficiencyOutOfRange { name: "eta_B", .. })
        ));
    }

    #[test]
    fn outside_region_still_constructs() {
        let t = doubly_tilted_chsh(0.6, 0.6).unwrap();
        assert!(!t.in_violation_region());
        assert!(doubly_tilted_chsh(0.85, 0.85).unwrap().in_violation_region());
    }

    #[test]
    fn critical_efficiency_values() {
        assert!(close(critical_efficiency_bob(1.0).unwrap(), 0.5, 1e-15));
        assert!(close(critical_efficiency_bob(2.0 / 3.0).unwrap(), 2.0 / 3.0, 1e-15));
        assert!(close(critical_efficiency_bob(0.85).unwrap(), 0.85 / 1.55, 1e-15));
        assert!((critical_efficiency_bob(0.85).unwrap() - 0.548387).abs() < 1e-6);
        assert!(matches!(critical_efficiency_bob(0.5), Err(Error::BelowHalf(_))));
        assert!(matches!(critical_efficiency_bob(0.3), Err(Error::BelowHalf(_))));
    }

    #[test]
    fn sixteen_assignments_split_evenly() {
        let all = enumerate_assignments();
        assert_eq!(all.len(), 16);
        assert_eq!(all.iter().collect::<HashSet<_>>().len(), 16);
        let class0 = all.iter().filter(|q| q.parity_class() == Some(0)).count();
        assert_eq!(class0, 8);
        assert_eq!(all[0], DeterministicAssignment::new(vec![0, 0], vec![0, 0]));
    }

    #[test]
    fn bits_round_trip() {
        for q in enumerate_assignments() {
            let (sa, sb, ra, rb) = q.bits().unwrap();
            assert_eq!(DeterministicAssignment::from_bits(sa, sb, ra, rb).unwrap(), q);
        }
        assert!(DeterministicAssignment::from_bits(2, 0, 0, 0).is_err());
    }

    #[test]
    fn effective_value_examples() {
        let plus = DeterministicAssignment::from_bits(0, 0, 0, 0).unwrap();
        let v = effective_chsh_value(2.98098, &plus, ETA, ETA).unwrap();
        assert!((v - 2.19876).abs() < 5e-6);
        let v = effective_chsh_value(2.0 * std::f64::consts::SQRT_2, &plus, 1.0, 1.0).unwrap();
        assert!(close(v, 2.0 * std::f64::consts::SQRT_2, 1e-15));
        let alt = DeterministicAssignment::from_bits(1, 0, 0, 0).unwrap();
        let c = 3.1;
        let d = effective_chsh_value(c, &plus, 0.9, 0.8).unwrap()
            - effective_chsh_value(c, &alt, 0.9, 0.8).unwrap();
        assert!(close(d, 4.0 * 0.1 * 0.2, 1e-15));
    }

    #[test]
    fn tilted_bound_matches_threshold_per_class() {
        for q in enumerate_assignments() {
            for &(ea, eb) in &[(0.85, 0.85), (0.7, 0.95), (0.93, 0.61)] {
                let t = tilt_functional(&BellFunctional::chsh(), &q, ea, eb).unwrap();
                let (a, b) = tilts_from_efficiencies(ea, eb).unwrap();
                assert!(close(t.tilted_local_bound(), 2.0 + a + b, 1e-12));
                if q.parity_class() == Some(0) {
                    assert!(close(t.loophole_free_threshold(), t.tilted_local_bound(), 1e-12));
                } else {
                    assert!(close(t.loophole_free_threshold(), 2.0 + a + b + a * b, 1e-12));
                }
            }
        }
    }

    #[test]
    fn parity_classes_are_the_relabeling_orbits() {
        let mut forms = std::collections::HashMap::new();
        for q in enumerate_assignments() {
            let t = tilt_functional(&BellFunctional::chsh(), &q, 0.8, 0.9).unwrap();
            let c = canonical_form(t.functional()).unwrap();
            forms.entry(c).or_insert_with(HashSet::new).insert(q.parity_class().unwrap());
        }
        assert_eq!(forms.len(), 2);
        for classes in forms.values() {
            assert_eq!(classes.len(), 1);
        }
    }

    #[test]
    fn relabeling_preserves_local_bound() {
        let t = assignment_tilted_chsh(1, 0, 1, 0, 0.8, 0.7).unwrap();
        for g in Relabeling::all() {
            let img = g.apply(t.functional()).unwrap();
            assert!(close(img.local_bound(), t.tilted_local_bound(), 1e-12));
        }
    }

    #[test]
    fn gap_vanishes_at_perfect_detectors() {
        let g = assignment_gap(1.0, 1.0).unwrap();
        assert!(g.delta.abs() < 1e-12);
        assert!(assignment_gap(0.85, 0.85).unwrap().delta > 0.0);
        assert!(assignment_gap(1.0, 0.75).unwrap().delta >= 0.0);
    }

    #[test]
    fn gap_flags_points_outside_region() {
        let g = assignment_gap(0.6, 0.6).unwrap();
        assert!(!g.in_violation_region);
        assert!(g.delta.is_finite());
    }

    #[test]
    fn boundary_identity_on_grid() {
        for i in 1..=40 {
            let eta_a = 0.5 + 0.5 * i as f64 / 40.0;
            let eta_b = critical_efficiency_bob(eta_a).unwrap();
            if eta_b > 1.0 {
                continue;
            }
            let (a, b) = tilts_from_efficiencies(eta_a, eta_b).unwrap();
            assert!(close(a + b, 2.0, 1e-12), "eta_A = {eta_a}");
        }
    }
}
