//! Maximal loophole-free CHSH nonlocality under detector inefficiency.
//!
//! The crate computes, for a pair of detector efficiencies, the tilted Bell
//! functional whose maximal quantum value yields the largest effective CHSH
//! violation, solves for that maximum and the optimal two-qubit strategy in
//! closed form, and cross-checks the closed-form results against a
//! brute-force qubit oracle and NPA semidefinite upper bounds.
//!
//! Module map:
//!
//! - [`bell`]: scenarios, behaviors, functional evaluation, local bounds and
//!   the detector-inefficiency map.
//! - [`tilting`]: tilted functionals, deterministic assignment strategies and
//!   the assignment-optimality gap.
//! - [`qubit`]: the two-qubit Bell operator, its spectrum, the brute-force
//!   oracle and stationarity residuals.
//! - [`closed_form`]: the degree-4 and degree-6 value polynomials, real-root
//!   isolation and the optimal-cosine formulas.
//! - [`npa`]: NPA moment-matrix relaxations and the embedded SDP solver.
//! - [`acceptance`]: the end-to-end acceptance checks.

// Index loops mirror the tensor notation; `!(x >= lo)` deliberately rejects NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod bell;
pub mod closed_form;
mod error;
pub mod linalg;
pub mod npa;
pub mod qubit;
pub mod tilting;

pub use bell::{Behavior, BellFunctional, CorrelatorForm, CorrelatorSet, Scenario};
pub use closed_form::{PolyKind, PolySpec, SelfTestReport};
pub use error::{Error, Result};
pub use npa::{MomentProblem, NpaLevel, SdpResult, SdpStatus};
pub use qubit::{QubitStrategy, SpectralResult};
pub use tilting::{DeterministicAssignment, TiltedFunctional};

/// Tolerance on negative probabilities and slice normalization.
pub const PROBABILITY_TOLERANCE: f64 = 1e-12;

/// Maximum marginal discrepancy accepted by the no-signaling predicate.
pub const NO_SIGNALING_TOLERANCE: f64 = 1e-10;
