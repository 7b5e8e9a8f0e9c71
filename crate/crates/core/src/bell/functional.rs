use serde::{Deserialize, Serialize};

use super::behavior::TableDoc;
use super::{assignments, outcome_sign, Behavior, Scenario};
use crate::error::{Error, Result};

/// Upper limit on `d_A^{m_A} d_B^{m_B}` for exact local-bound enumeration.
pub const MAX_DETERMINISTIC_VERTICES: u128 = 10_000_000;

/// Linear functional `β(p) = Σ β_{abxy} p(ab|xy)` with its local bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FunctionalDoc", into = "FunctionalDoc")]
pub struct BellFunctional {
    scenario: Scenario,
    coeffs: Vec<f64>,
    local_bound: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FunctionalDoc {
    #[serde(flatten)]
    table: TableDoc,
    #[serde(rename = "localBound", default, skip_deserializing)]
    local_bound: Option<f64>,
}

impl TryFrom<FunctionalDoc> for BellFunctional {
    type Error = Error;

    fn try_from(doc: FunctionalDoc) -> Result<Self> {
        let (scenario, coeffs) = doc.table.into_flat()?;
        BellFunctional::new(scenario, coeffs)
    }
}

impl From<BellFunctional> for FunctionalDoc {
    fn from(f: BellFunctional) -> Self {
        FunctionalDoc {
            table: TableDoc::from_flat(f.scenario, &f.coeffs),
            local_bound: Some(f.local_bound),
        }
    }
}

impl BellFunctional {
    /// Builds the functional and caches its local bound by vertex enumeration.
    pub fn new(scenario: Scenario, coeffs: Vec<f64>) -> Result<Self> {
        scenario.validate()?;
        if coeffs.len() != scenario.len() {
            return Err(Error::InvalidArgument(format!(
                "coefficient tensor has {} entries, scenario {scenario} needs {}",
                coeffs.len(),
                scenario.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coefficient".into()));
        }
        let (local_bound, _, _) = enumerate_local_bound(scenario, &coeffs)?;
        Ok(BellFunctional {
            scenario,
            coeffs,
            local_bound,
        })
    }

    pub fn zero(scenario: Scenario) -> Result<Self> {
        BellFunctional::new(scenario, vec![0.0; scenario.len()])
    }

    /// `Σ_{xy} (-1)^{xy} ⟨A_x B_y⟩`.
    pub fn chsh() -> Self {
        Self::from_correlator_form(&CorrelatorForm {
            correlators: [[1.0, 1.0], [1.0, -1.0]],
            ..Default::default()
        })
    }

    /// Probability-table representation of a correlator-form functional.
    /// Marginal terms are spread evenly over the other party's inputs, which
    /// agrees with the correlator form on every no-signaling behavior.
    pub fn from_correlator_form(form: &CorrelatorForm) -> Self {
        let s = Scenario::CHSH;
        let mut coeffs = vec![0.0; s.len()];
        for x in 0..2 {
            for y in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        let (sa, sb) = (outcome_sign(a), outcome_sign(b));
                        coeffs[s.index(x, y, a, b)] = 0.25 * form.constant
                            + 0.5 * sa * form.alice[x]
                            + 0.5 * sb * form.bob[y]
                            + sa * sb * form.correlators[x][y];
                    }
                }
            }
        }
        BellFunctional::new(s, coeffs).expect("CHSH-scenario functional is always enumerable")
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, a: usize, b: usize, x: usize, y: usize) -> f64 {
        self.coeffs[self.scenario.index(x, y, a, b)]
    }

    /// Maximum over local deterministic strategies (cached).
    pub fn local_bound(&self) -> f64 {
        self.local_bound
    }

    pub fn evaluate(&self, p: &Behavior) -> Result<f64> {
        if p.scenario() != self.scenario {
            return Err(Error::ScenarioMismatch {
                expected: self.scenario,
                found: p.scenario(),
            });
        }
        Ok(self.coeffs.iter().zip(p.table()).map(|(c, v)| c * v).sum())
    }

    /// Value on the deterministic vertex `(a_x), (b_y)`.
    pub fn value_at_vertex(&self, ax: &[usize], by: &[usize]) -> f64 {
        let s = self.scenario;
        let mut v = 0.0;
        for (x, &a) in ax.iter().enumerate() {
            for (y, &b) in by.iter().enumerate() {
                v += self.coeffs[s.index(x, y, a, b)];
            }
        }
        v
    }

    /// Unique decomposition of a `(2,2,2,2)` functional into correlator form,
    /// valid on no-signaling behaviors.
    pub fn correlator_form(&self) -> Result<CorrelatorForm> {
        if !self.scenario.is_chsh() {
            return Err(Error::ScenarioMismatch {
                expected: Scenario::CHSH,
                found: self.scenario,
            });
        }
        let mut form = CorrelatorForm::default();
        for x in 0..2 {
            for y in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        let (sa, sb) = (outcome_sign(a), outcome_sign(b));
                        let c = 0.25 * self.coeff(a, b, x, y);
                        form.constant += c;
                        form.alice[x] += sa * c;
                        form.bob[y] += sb * c;
                        form.correlators[x][y] += sa * sb * c;
                    }
                }
            }
        }
        Ok(form)
    }

    /// Pointwise linear combination `self + w other`.
    pub fn add_scaled(&self, other: &BellFunctional, w: f64) -> Result<BellFunctional> {
        if self.scenario != other.scenario {
            return Err(Error::ScenarioMismatch {
                expected: self.scenario,
                found: other.scenario,
            });
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + w * b)
            .collect();
        BellFunctional::new(self.scenario, coeffs)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("functional serializes")
    }
}

/// `constant + Σ alice[x]⟨A_x⟩ + Σ bob[y]⟨B_y⟩ + Σ correlators[x][y]⟨A_xB_y⟩`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorForm {
    pub constant: f64,
    pub alice: [f64; 2],
    pub bob: [f64; 2],
    pub correlators: [[f64; 2]; 2],
}

/// Exact local bound of a coefficient tensor together with a maximizing
/// vertex. For each Alice assignment Bob's optimum decouples across inputs,
/// so only Alice's `d_A^{m_A}` assignments are looped over explicitly.
pub(crate) fn enumerate_local_bound(
    s: Scenario,
    coeffs: &[f64],
) -> Result<(f64, Vec<usize>, Vec<usize>)> {
    let count = s.deterministic_vertex_count();
    if count > MAX_DETERMINISTIC_VERTICES {
        return Err(Error::TooLargeScenario(s, count));
    }
    let mut best = (f64::NEG_INFINITY, Vec::new(), Vec::new());
    for ax in assignments(s.m_a, s.d_a) {
        let mut total = 0.0;
        let mut by = vec![0; s.m_b];
        for (y, slot) in by.iter_mut().enumerate() {
            let (mut bv, mut bb) = (f64::NEG_INFINITY, 0);
            for b in 0..s.d_b {
                let v: f64 = ax
                    .iter()
                    .enumerate()
                    .map(|(x, &a)| coeffs[s.index(x, y, a, b)])
                    .sum();
                if v > bv {
                    bv = v;
                    bb = b;
                }
            }
            *slot = bb;
            total += bv;
        }
        if total > best.0 {
            best = (total, ax, by);
        }
    }
    Ok(best)
}

/// Local bound of `f`: the maximum of the functional over all deterministic
/// assignments `(a_x), (b_y)`.
pub fn local_bound(f: &BellFunctional) -> f64 {
    f.local_bound()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::{behavior_from_correlators, CorrelatorSet};
    use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

    #[test]
    fn chsh_local_bound_is_two() {
        assert_eq!(BellFunctional::chsh().local_bound(), 2.0);
    }

    #[test]
    fn zero_functional_bound() {
        assert_eq!(BellFunctional::zero(Scenario::CHSH).unwrap().local_bound(), 0.0);
        let big = Scenario::new(3, 3, 4, 4).unwrap();
        assert_eq!(BellFunctional::zero(big).unwrap().local_bound(), 0.0);
    }

    #[test]
    fn chsh_on_tsirelson_and_vertex() {
        let iso = behavior_from_correlators(&CorrelatorSet {
            exy: [
                [FRAC_1_SQRT_2, FRAC_1_SQRT_2],
                [FRAC_1_SQRT_2, -FRAC_1_SQRT_2],
            ],
            ax: [0.0; 2],
            by: [0.0; 2],
        })
        .unwrap();
        let chsh = BellFunctional::chsh();
        assert!((chsh.evaluate(&iso).unwrap() - 2.0 * SQRT_2).abs() < 1e-14);
        let plus = Behavior::deterministic(Scenario::CHSH, &[0, 0], &[0, 0]).unwrap();
        assert!((chsh.evaluate(&plus).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_value_is_quarter_sum() {
        let coeffs: Vec<f64> = (0..16).map(|k| (k as f64 * 0.37).sin()).collect();
        let f = BellFunctional::new(Scenario::CHSH, coeffs.clone()).unwrap();
        let v = f.evaluate(&Behavior::uniform(Scenario::CHSH)).unwrap();
        assert!((v - coeffs.iter().sum::<f64>() / 4.0).abs() < 1e-14);
    }

    #[test]
    fn scenario_mismatch_rejected() {
        let f = BellFunctional::chsh();
        let p = Behavior::uniform(Scenario::new(2, 3, 2, 2).unwrap());
        assert!(matches!(f.evaluate(&p), Err(Error::ScenarioMismatch { .. })));
    }

    #[test]
    fn oversized_scenario_rejected() {
        let s = Scenario::new(8, 8, 3, 3).unwrap();
        assert!(matches!(
            BellFunctional::zero(s),
            Err(Error::TooLargeScenario(_, _))
        ));
    }

    #[test]
    fn decoupled_enumeration_matches_brute_force() {
        let s = Scenario::new(3, 2, 2, 3).unwrap();
        let coeffs: Vec<f64> = (0..s.len()).map(|k| ((k * 7 + 3) as f64).cos()).collect();
        let f = BellFunctional::new(s, coeffs).unwrap();
        let mut brute = f64::NEG_INFINITY;
        for ax in assignments(s.m_a, s.d_a) {
            for by in assignments(s.m_b, s.d_b) {
                brute = brute.max(f.value_at_vertex(&ax, &by));
            }
        }
        assert!((brute - f.local_bound()).abs() < 1e-13);
    }

    #[test]
    fn correlator_form_round_trip() {
        let form = CorrelatorForm {
            constant: 0.3,
            alice: [0.5, -0.25],
            bob: [0.1, 0.7],
            correlators: [[1.0, 2.0], [-0.5, 0.125]],
        };
        let f = BellFunctional::from_correlator_form(&form);
        let back = f.correlator_form().unwrap();
        assert!((back.constant - form.constant).abs() < 1e-15);
        for i in 0..2 {
            assert!((back.alice[i] - form.alice[i]).abs() < 1e-15);
            assert!((back.bob[i] - form.bob[i]).abs() < 1e-15);
            for j in 0..2 {
                assert!((back.correlators[i][j] - form.correlators[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn json_round_trip_recomputes_bound() {
        let f = BellFunctional::chsh();
        let v: serde_json::Value = serde_json::from_str(&f.to_json()).unwrap();
        assert_eq!(v["localBound"], 2.0);
        let back: BellFunctional = serde_json::from_value(v).unwrap();
        assert_eq!(back, f);
    }
}
