use serde::{Deserialize, Serialize};

use super::{outcome_sign, Scenario};
use crate::error::{Error, Result};
use crate::{NO_SIGNALING_TOLERANCE, PROBABILITY_TOLERANCE};

/// Joint conditional distribution `p(ab|xy)`.
///
/// Construction validates normalization of every `(x, y)` slice and
/// non-negativity, both to [`PROBABILITY_TOLERANCE`]. Behaviors are immutable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TableDoc", into = "TableDoc")]
pub struct Behavior {
    scenario: Scenario,
    table: Vec<f64>,
}

/// JSON layout shared by behaviors and functionals: one row per `(x, y)`
/// pair in row-major order, each row holding the `d_A d_B` entries ordered
/// `(a, b)` row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct TableDoc {
    pub scenario: Scenario,
    pub table: Vec<Vec<f64>>,
}

impl TableDoc {
    pub(crate) fn from_flat(scenario: Scenario, flat: &[f64]) -> Self {
        TableDoc {
            scenario,
            table: flat
                .chunks(scenario.slice_len())
                .map(|c| c.to_vec())
                .collect(),
        }
    }

    pub(crate) fn into_flat(self) -> Result<(Scenario, Vec<f64>)> {
        self.scenario.validate()?;
        let s = self.scenario;
        if self.table.len() != s.m_a * s.m_b {
            return Err(Error::InvalidBehavior(format!(
                "expected {} rows, found {}",
                s.m_a * s.m_b,
                self.table.len()
            )));
        }
        if let Some(row) = self.table.iter().find(|r| r.len() != s.slice_len()) {
            return Err(Error::InvalidBehavior(format!(
                "expected rows of length {}, found {}",
                s.slice_len(),
                row.len()
            )));
        }
        Ok((s, self.table.into_iter().flatten().collect()))
    }
}

impl TryFrom<TableDoc> for Behavior {
    type Error = Error;

    fn try_from(doc: TableDoc) -> Result<Self> {
        let (scenario, table) = doc.into_flat()?;
        Behavior::new(scenario, table)
    }
}

impl From<Behavior> for TableDoc {
    fn from(b: Behavior) -> Self {
        TableDoc::from_flat(b.scenario, &b.table)
    }
}

impl Behavior {
    pub fn new(scenario: Scenario, table: Vec<f64>) -> Result<Self> {
        scenario.validate()?;
        if table.len() != scenario.len() {
            return Err(Error::InvalidBehavior(format!(
                "table has {} entries, scenario {scenario} needs {}",
                table.len(),
                scenario.len()
            )));
        }
        if let Some((i, v)) = table
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < -PROBABILITY_TOLERANCE)
        {
            return Err(Error::InvalidBehavior(format!("entry {i} = {v:e}")));
        }
        for (k, slice) in table.chunks(scenario.slice_len()).enumerate() {
            let total: f64 = slice.iter().sum();
            if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
                return Err(Error::InvalidBehavior(format!(
                    "slice (x={}, y={}) sums to {total}",
                    k / scenario.m_b,
                    k % scenario.m_b
                )));
            }
        }
        Ok(Behavior { scenario, table })
    }

    pub fn uniform(scenario: Scenario) -> Self {
        let v = 1.0 / scenario.slice_len() as f64;
        Behavior {
            scenario,
            table: vec![v; scenario.len()],
        }
    }

    /// The local deterministic vertex `p(ab|xy) = δ_{a,a_x} δ_{b,b_y}`.
    pub fn deterministic(scenario: Scenario, ax: &[usize], by: &[usize]) -> Result<Self> {
        if ax.len() != scenario.m_a || by.len() != scenario.m_b {
            return Err(Error::InvalidBehavior(
                "assignment length does not match the input count".into(),
            ));
        }
        if ax.iter().any(|&a| a >= scenario.d_a) || by.iter().any(|&b| b >= scenario.d_b) {
            return Err(Error::InvalidBehavior(
                "assigned outcome out of range".into(),
            ));
        }
        let mut table = vec![0.0; scenario.len()];
        for x in 0..scenario.m_a {
            for y in 0..scenario.m_b {
                table[scenario.index(x, y, ax[x], by[y])] = 1.0;
            }
        }
        Ok(Behavior { scenario, table })
    }

    /// Product behavior `p_A(a|x) p_B(b|y)` from marginal tables indexed `[x][a]`, `[y][b]`.
    pub fn product(scenario: Scenario, pa: &[Vec<f64>], pb: &[Vec<f64>]) -> Result<Self> {
        let mut table = vec![0.0; scenario.len()];
        for x in 0..scenario.m_a {
            for y in 0..scenario.m_b {
                for a in 0..scenario.d_a {
                    for b in 0..scenario.d_b {
                        table[scenario.index(x, y, a, b)] = pa[x][a] * pb[y][b];
                    }
                }
            }
        }
        Behavior::new(scenario, table)
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn get(&self, a: usize, b: usize, x: usize, y: usize) -> f64 {
        self.table[self.scenario.index(x, y, a, b)]
    }

    /// Alice's marginal `p_A(a|x)`, averaged over Bob's inputs. For a
    /// no-signaling behavior the average is the marginal.
    pub fn marginal_a(&self) -> Vec<Vec<f64>> {
        let s = self.scenario;
        (0..s.m_a)
            .map(|x| {
                (0..s.d_a)
                    .map(|a| {
                        let sum: f64 = (0..s.m_b)
                            .flat_map(|y| (0..s.d_b).map(move |b| (y, b)))
                            .map(|(y, b)| self.get(a, b, x, y))
                            .sum();
                        sum / s.m_b as f64
                    })
                    .collect()
            })
            .collect()
    }

    /// Bob's marginal `p_B(b|y)`, averaged over Alice's inputs.
    pub fn marginal_b(&self) -> Vec<Vec<f64>> {
        let s = self.scenario;
        (0..s.m_b)
            .map(|y| {
                (0..s.d_b)
                    .map(|b| {
                        let sum: f64 = (0..s.m_a)
                            .flat_map(|x| (0..s.d_a).map(move |a| (x, a)))
                            .map(|(x, a)| self.get(a, b, x, y))
                            .sum();
                        sum / s.m_a as f64
                    })
                    .collect()
            })
            .collect()
    }

    /// Largest discrepancy between marginals computed under different
    /// choices of the other party's input.
    pub fn signaling_discrepancy(&self) -> f64 {
        let s = self.scenario;
        let mut worst: f64 = 0.0;
        for x in 0..s.m_a {
            for a in 0..s.d_a {
                let m: Vec<f64> = (0..s.m_b)
                    .map(|y| (0..s.d_b).map(|b| self.get(a, b, x, y)).sum())
                    .collect();
                worst = m.iter().fold(worst, |w, v| w.max((v - m[0]).abs()));
            }
        }
        for y in 0..s.m_b {
            for b in 0..s.d_b {
                let m: Vec<f64> = (0..s.m_a)
                    .map(|x| (0..s.d_a).map(|a| self.get(a, b, x, y)).sum())
                    .collect();
                worst = m.iter().fold(worst, |w, v| w.max((v - m[0]).abs()));
            }
        }
        worst
    }

    pub fn is_no_signaling(&self) -> bool {
        self.signaling_discrepancy() <= NO_SIGNALING_TOLERANCE
    }

    /// Convex combination `w self + (1 - w) other`.
    pub fn mix(&self, other: &Behavior, w: f64) -> Result<Behavior> {
        if self.scenario != other.scenario {
            return Err(Error::ScenarioMismatch {
                expected: self.scenario,
                found: other.scenario,
            });
        }
        let table = self
            .table
            .iter()
            .zip(&other.table)
            .map(|(p, q)| w * p + (1.0 - w) * q)
            .collect();
        Behavior::new(self.scenario, table)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("behavior serializes")
    }
}

/// Full-correlator description of a `(2,2,2,2)` no-signaling behavior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorSet {
    /// `⟨A_x B_y⟩` indexed `[x][y]`.
    pub exy: [[f64; 2]; 2],
    /// `⟨A_x⟩`.
    pub ax: [f64; 2],
    /// `⟨B_y⟩`.
    pub by: [f64; 2],
}

impl CorrelatorSet {
    pub fn zero() -> Self {
        CorrelatorSet {
            exy: [[0.0; 2]; 2],
            ax: [0.0; 2],
            by: [0.0; 2],
        }
    }

    /// Value of `Σ (-1)^{xy} ⟨A_x B_y⟩`.
    pub fn chsh(&self) -> f64 {
        self.exy[0][0] + self.exy[0][1] + self.exy[1][0] - self.exy[1][1]
    }
}

/// `p(ab|xy) = (1 + a⟨A_x⟩ + b⟨B_y⟩ + ab⟨A_xB_y⟩) / 4`.
pub fn behavior_from_correlators(c: &CorrelatorSet) -> Result<Behavior> {
    let s = Scenario::CHSH;
    let mut table = vec![0.0; s.len()];
    for x in 0..2 {
        for y in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    let (sa, sb) = (outcome_sign(a), outcome_sign(b));
                    let p = 0.25 * (1.0 + sa * c.ax[x] + sb * c.by[y] + sa * sb * c.exy[x][y]);
                    if !p.is_finite() || p < -PROBABILITY_TOLERANCE {
                        return Err(Error::InvalidCorrelators {
                            a: sa as i8,
                            b: sb as i8,
                            x,
                            y,
                            value: p,
                        });
                    }
                    table[s.index(x, y, a, b)] = p;
                }
            }
        }
    }
    Behavior::new(s, table)
}

/// Inverse of [`behavior_from_correlators`]; marginals are averaged over the
/// other party's input.
pub fn correlators_from_behavior(p: &Behavior) -> Result<CorrelatorSet> {
    if !p.scenario().is_chsh() {
        return Err(Error::ScenarioMismatch {
            expected: Scenario::CHSH,
            found: p.scenario(),
        });
    }
    let mut c = CorrelatorSet::zero();
    for x in 0..2 {
        for y in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    let (sa, sb) = (outcome_sign(a), outcome_sign(b));
                    let v = p.get(a, b, x, y);
                    c.exy[x][y] += sa * sb * v;
                    c.ax[x] += 0.5 * sa * v;
                    c.by[y] += 0.5 * sb * v;
                }
            }
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn tsirelson() -> CorrelatorSet {
        CorrelatorSet {
            exy: [
                [FRAC_1_SQRT_2, FRAC_1_SQRT_2],
                [FRAC_1_SQRT_2, -FRAC_1_SQRT_2],
            ],
            ax: [0.0; 2],
            by: [0.0; 2],
        }
    }

    #[test]
    fn zero_correlators_give_uniform() {
        let p = behavior_from_correlators(&CorrelatorSet::zero()).unwrap();
        assert_eq!(p, Behavior::uniform(Scenario::CHSH));
    }

    #[test]
    fn all_plus_correlators_give_deterministic_vertex() {
        let c = CorrelatorSet {
            exy: [[1.0; 2]; 2],
            ax: [1.0; 2],
            by: [1.0; 2],
        };
        let p = behavior_from_correlators(&c).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                assert_eq!(p.get(0, 0, x, y), 1.0);
            }
        }
        assert_eq!(p, Behavior::deterministic(Scenario::CHSH, &[0, 0], &[0, 0]).unwrap());
    }

    #[test]
    fn tsirelson_round_trip() {
        let c = tsirelson();
        let p = behavior_from_correlators(&c).unwrap();
        let back = correlators_from_behavior(&p).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                assert!((back.exy[x][y] - c.exy[x][y]).abs() < 1e-14);
            }
            assert!(back.ax[x].abs() < 1e-14 && back.by[x].abs() < 1e-14);
        }
        assert!((back.chsh() - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn impossible_correlators_rejected() {
        let c = CorrelatorSet {
            exy: [[-1.0, 0.0], [0.0, 0.0]],
            ax: [1.0, 0.0],
            by: [1.0, 0.0],
        };
        assert!(matches!(
            behavior_from_correlators(&c),
            Err(Error::InvalidCorrelators { x: 0, y: 0, .. })
        ));
    }

    #[test]
    fn unnormalized_table_rejected() {
        let mut t = vec![0.25; 16];
        t[0] = 0.3;
        assert!(Behavior::new(Scenario::CHSH, t).is_err());
        let mut t = vec![0.25; 16];
        t[0] = 0.5;
        t[1] = 0.0;
        t[2] = 0.25;
        t[3] = 0.25;
        assert!(Behavior::new(Scenario::CHSH, t).is_ok());
    }

    #[test]
    fn negative_entry_rejected() {
        let mut t = vec![0.25; 16];
        t[0] = -1e-9;
        t[1] = 0.25 + 1e-9;
        assert!(matches!(
            Behavior::new(Scenario::CHSH, t),
            Err(Error::InvalidBehavior(_))
        ));
    }

    #[test]
    fn signaling_behavior_detected() {
        // Alice outputs +1 when Bob's input is 0 and -1 when it is 1.
        let mut t = vec![0.0; 16];
        let s = Scenario::CHSH;
        for x in 0..2 {
            t[s.index(x, 0, 0, 0)] = 1.0;
            t[s.index(x, 1, 1, 0)] = 1.0;
        }
        let p = Behavior::new(s, t).unwrap();
        assert!(!p.is_no_signaling());
        assert!((p.signaling_discrepancy() - 1.0).abs() < 1e-15);
        assert!(Behavior::uniform(s).is_no_signaling());
    }

    #[test]
    fn json_layout_is_rows_of_xy() {
        let p = Behavior::deterministic(Scenario::CHSH, &[0, 1], &[0, 0]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&p.to_json()).unwrap();
        assert_eq!(v["scenario"]["mA"], 2);
        assert_eq!(v["table"].as_array().unwrap().len(), 4);
        // x = 1, y = 0 row: a = -1 (index 1), b = +1 (index 0) -> entry 2.
        assert_eq!(v["table"][2][2], 1.0);
        let back: Behavior = serde_json::from_value(v).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn json_rejects_bad_rows() {
        let doc = r#"{"scenario":{"mA":2,"mB":2,"dA":2,"dB":2},"table":[[1,0,0,0]]}"#;
        assert!(serde_json::from_str::<Behavior>(doc).is_err());
    }
}
