//! Bell scenarios, behaviors and linear Bell functionals.
//!
//! A behavior is stored as a dense table indexed `(x, y, a, b)` in row-major
//! order. In the CHSH scenario outcome index `0` is the `+1` outcome and
//! index `1` is the `-1` outcome.

mod behavior;
mod effective;
mod functional;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use behavior::{behavior_from_correlators, correlators_from_behavior, Behavior, CorrelatorSet};
pub use effective::effective_behavior;
pub use functional::{local_bound, BellFunctional, CorrelatorForm, MAX_DETERMINISTIC_VERTICES};

/// Input and outcome counts `(m_A, m_B, d_A, d_B)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(rename = "mA")]
    pub m_a: usize,
    #[serde(rename = "mB")]
    pub m_b: usize,
    #[serde(rename = "dA")]
    pub d_a: usize,
    #[serde(rename = "dB")]
    pub d_b: usize,
}

impl Scenario {
    pub const CHSH: Scenario = Scenario {
        m_a: 2,
        m_b: 2,
        d_a: 2,
        d_b: 2,
    };

    pub fn new(m_a: usize, m_b: usize, d_a: usize, d_b: usize) -> Result<Self> {
        let s = Scenario { m_a, m_b, d_a, d_b };
        s.validate()?;
        Ok(s)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.m_a == 0 || self.m_b == 0 || self.d_a == 0 || self.d_b == 0 {
            return Err(Error::InvalidScenario(format!(
                "all counts must be at least 1, got {self}"
            )));
        }
        Ok(())
    }

    pub fn is_chsh(&self) -> bool {
        *self == Self::CHSH
    }

    /// Total number of table entries `m_A m_B d_A d_B`.
    pub fn len(&self) -> usize {
        self.m_a * self.m_b * self.d_a * self.d_b
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Entries per `(x, y)` slice.
    pub fn slice_len(&self) -> usize {
        self.d_a * self.d_b
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, a: usize, b: usize) -> usize {
        ((x * self.m_b + y) * self.d_a + a) * self.d_b + b
    }

    /// Number of deterministic local strategies `d_A^{m_A} d_B^{m_B}`, saturating.
    pub fn deterministic_vertex_count(&self) -> u128 {
        let pow = |d: usize, m: usize| (d as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
        pow(self.d_a, self.m_a).saturating_mul(pow(self.d_b, self.m_b))
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.m_a, self.m_b, self.d_a, self.d_b)
    }
}

/// `+1` for outcome index 0, `-1` for outcome index 1 (dichotomic outcomes).
#[inline]
pub fn outcome_sign(index: usize) -> f64 {
    if index == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Iterates over all assignments `(o_0, ..., o_{m-1})` with `o_i < d`, in
/// lexicographic order with the last input varying fastest.
pub(crate) fn assignments(m: usize, d: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = (d as u128).pow(m as u32) as usize;
    (0..total).map(move |mut k| {
        let mut out = vec![0; m];
        for slot in out.iter_mut().rev() {
            *slot = k % d;
            k /= d;
        }
        out
    })
}
