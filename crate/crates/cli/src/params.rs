//! Parameter-point flags shared by the single-point subcommands.

use clap::Args;

use tiltbell::tilting::{efficiencies_from_tilts, tilts_from_efficiencies};

use crate::{CliError, CliResult};

/// A parameter point, given as efficiencies or as tilts.
#[derive(Debug, Args)]
pub struct PointArgs {
    /// Alice's detection efficiency in (0, 1] [default: 1].
    #[arg(long = "etaA", visible_alias = "eta-a", value_name = "ETA", conflicts_with_all = ["alpha", "beta"])]
    pub eta_a: Option<f64>,
    /// Bob's detection efficiency in (0, 1] [default: 1].
    #[arg(long = "etaB", visible_alias = "eta-b", value_name = "ETA", conflicts_with_all = ["alpha", "beta"])]
    pub eta_b: Option<f64>,
    /// Tilt on Alice's <A_0>, alpha = 2(1 - etaB)/etaB [default: 0].
    #[arg(long, value_name = "ALPHA")]
    pub alpha: Option<f64>,
    /// Tilt on Bob's <B_0>, beta = 2(1 - etaA)/etaA [default: 0].
    #[arg(long, value_name = "BETA")]
    pub beta: Option<f64>,
}

/// A resolved parameter point carrying both parametrizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub eta_a: f64,
    pub eta_b: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Point {
    pub fn from_efficiencies(eta_a: f64, eta_b: f64) -> CliResult<Self> {
        let (alpha, beta) = tilts_from_efficiencies(eta_a, eta_b)?;
        Ok(Point {
            eta_a,
            eta_b,
            alpha,
            beta,
        })
    }

    pub fn from_tilts(alpha: f64, beta: f64) -> CliResult<Self> {
        let (eta_a, eta_b) = efficiencies_from_tilts(alpha, beta)?;
        Ok(Point {
            eta_a,
            eta_b,
            alpha,
            beta,
        })
    }
}

impl PointArgs {
    pub fn resolve(&self) -> CliResult<Point> {
        let by_eta = self.eta_a.is_some() || self.eta_b.is_some();
        let by_tilt = self.alpha.is_some() || self.beta.is_some();
        if by_eta && by_tilt {
            return Err(CliError::Usage(
                "give either --etaA/--etaB or --alpha/--beta, not both".into(),
            ));
        }
        if by_tilt {
            Point::from_tilts(self.alpha.unwrap_or(0.0), self.beta.unwrap_or(0.0))
        } else {
            Point::from_efficiencies(self.eta_a.unwrap_or(1.0), self.eta_b.unwrap_or(1.0))
        }
    }
}
