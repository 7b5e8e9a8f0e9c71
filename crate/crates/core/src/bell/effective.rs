use super::Behavior;
use crate::error::{Error, Result};

fn check_efficiency(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::EfficiencyOutOfRange { name, value });
    }
    Ok(())
}

/// Behavior observed when no-click events of an ideal behavior `p` are
/// replaced by outcomes drawn from the local assignment strategy `q`:
///
/// `p̃ = η_Aη_B p + η_A(1-η_B) p^A⊗q^B + (1-η_A)η_B q^A⊗p^B + (1-η_A)(1-η_B) q`.
///
/// `q` must be no-signaling so that its marginals are well defined.
pub fn effective_behavior(p: &Behavior, q: &Behavior, eta_a: f64, eta_b: f64) -> Result<Behavior> {
    check_efficiency("eta_A", eta_a)?;
    check_efficiency("eta_B", eta_b)?;
    if p.scenario() != q.scenario() {
        return Err(Error::ScenarioMismatch {
            expected: p.scenario(),
            found: q.scenario(),
        });
    }
    let drift = q.signaling_discrepancy();
    if drift > crate::NO_SIGNALING_TOLERANCE {
        return Err(Error::SignalingAssignment(drift));
    }

    let s = p.scenario();
    let (pa, pb) = (p.marginal_a(), p.marginal_b());
    let (qa, qb) = (q.marginal_a(), q.marginal_b());
    let w_both = eta_a * eta_b;
    let w_a_only = eta_a * (1.0 - eta_b);
    let w_b_only = (1.0 - eta_a) * eta_b;
    let w_none = (1.0 - eta_a) * (1.0 - eta_b);

    let mut table = vec![0.0; s.len()];
    for x in 0..s.m_a {
        for y in 0..s.m_b {
            for a in 0..s.d_a {
                for b in 0..s.d_b {
                    table[s.index(x, y, a, b)] = w_both * p.get(a, b, x, y)
                        + w_a_only * pa[x][a] * qb[y][b]
                        + w_b_only * qa[x][a] * pb[y][b]
                        + w_none * q.get(a, b, x, y);
                }
            }
        }
    }
    Behavior::new(s, table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::{behavior_from_correlators, BellFunctional, CorrelatorSet, Scenario};
    use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

    fn iso() -> Behavior {
        behavior_from_correlators(&CorrelatorSet {
            exy: [
                [FRAC_1_SQRT_2, FRAC_1_SQRT_2],
                [FRAC_1_SQRT_2, -FRAC_1_SQRT_2],
            ],
            ax: [0.0; 2],
            by: [0.0; 2],
        })
        .unwrap()
    }

    fn plus() -> Behavior {
        Behavior::deterministic(Scenario::CHSH, &[0, 0], &[0, 0]).unwrap()
    }

    #[test]
    fn perfect_detectors_are_identity() {
        let p = iso();
        let out = effective_behavior(&p, &plus(), 1.0, 1.0).unwrap();
        for (u, v) in out.table().iter().zip(p.table()) {
            assert!((u - v).abs() < 1e-15);
        }
    }

    #[test]
    fn dead_detectors_give_assignment() {
        let out = effective_behavior(&iso(), &plus(), 0.0, 0.0).unwrap();
        assert_eq!(out, plus());
    }

    #[test]
    fn isotropic_effective_chsh_at_085() {
        let out = effective_behavior(&iso(), &plus(), 0.85, 0.85).unwrap();
        let v = BellFunctional::chsh().evaluate(&out).unwrap();
        let expected = 0.7225 * 2.0 * SQRT_2 + 0.045;
        assert!((v - expected).abs() < 1e-12);
        assert!((v - 2.08854).abs() < 5e-6);
    }

    #[test]
    fn efficiency_range_checked() {
        assert!(matches!(
            effective_behavior(&iso(), &plus(), 1.2, 0.5),
            Err(Error::EfficiencyOutOfRange { name: "eta_A", .. })
        ));
        assert!(matches!(
            effective_behavior(&iso(), &plus(), 0.5, -0.1),
            Err(Error::EfficiencyOutOfRange { name: "eta_B", .. })
        ));
    }

    #[test]
    fn signaling_assignment_rejected() {
        let s = Scenario::CHSH;
        let mut t = vec![0.0; 16];
        for x in 0..2 {
            t[s.index(x, 0, 0, 0)] = 1.0;
            t[s.index(x, 1, 1, 0)] = 1.0;
        }
        let q = Behavior::new(s, t).unwrap();
        assert!(matches!(
            effective_behavior(&iso(), &q, 0.9, 0.9),
            Err(Error::SignalingAssignment(_))
        ));
    }
}
