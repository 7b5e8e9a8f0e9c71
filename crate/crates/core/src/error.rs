use thiserror::Error;

use crate::bell::Scenario;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid behavior: {0}")]
    InvalidBehavior(String),

    #[error("invalid correlators: reconstructed p({a}{b}|{x}{y}) = {value:e} is negative")]
    InvalidCorrelators {
        a: i8,
        b: i8,
        x: usize,
        y: usize,
        value: f64,
    },

    #[error("scenario mismatch: expected {expected}, found {found}")]
    ScenarioMismatch { expected: Scenario, found: Scenario },

    #[error("scenario {0} has {1} deterministic vertices, above the enumeration limit")]
    TooLargeScenario(Scenario, u128),

    #[error("efficiency {name} = {value} is outside [0, 1]")]
    EfficiencyOutOfRange { name: &'static str, value: f64 },

    #[error("efficiency {name} = {value} must be strictly positive")]
    ZeroEfficiency { name: &'static str, value: f64 },

    #[error("assignment strategy is signaling (max marginal discrepancy {0:e})")]
    SignalingAssignment(f64),

    #[error("eta_A = {0} is not above 1/2: no finite critical efficiency for Bob")]
    BelowHalf(f64),

    #[error("cosine {name} = {value} is outside [0, 1]")]
    CosineOutOfRange { name: &'static str, value: f64 },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NonSymmetric(f64),

    #[error("alpha + beta = {0} is at or beyond the violation boundary 2")]
    BoundaryDegenerate(f64),

    #[error("tilt {name} = {value} is outside its valid range {range}")]
    TiltOutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("polynomial has a vanishing leading coefficient")]
    DegenerateLeadingCoefficient,

    #[error("polynomial degree {0} exceeds the supported maximum of 8")]
    DegreeTooLarge(usize),

    #[error("negative radicand {0:e} in the optimal-cosine formula (cQ is not the maximal value)")]
    NegativeRadicand(f64),

    #[error("NPA level {0} exceeds the double-precision guard; pass the override to allow it")]
    LevelTooLarge(String),

    #[error("unsupported scenario for the NPA construction: {0}")]
    UnsupportedScenario(Scenario),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("semidefinite solver failure: {0}")]
    Solver(String),
}
