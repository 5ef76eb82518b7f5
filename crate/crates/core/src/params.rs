use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimensionless material constants of the driven chain.
///
/// `mu` is the substrate-to-bond stiffness ratio, `alpha` the viscosity
/// coefficient (zero for the conservative chain).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub mu: f64,
    pub alpha: f64,
}

impl ModelParams {
    pub fn new(mu: f64, alpha: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::InvalidParameter(format!("mu must be positive, got {mu}")));
        }
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be nonnegative, got {alpha}"
            )));
        }
        Ok(Self { mu, alpha })
    }

    /// Conservative chain (`alpha = 0`).
    pub fn conservative(mu: f64) -> Result<Self> {
        Self::new(mu, 0.0)
    }

    pub fn is_conservative(&self) -> bool {
        self.alpha == 0.0
    }

    /// Static depinning stress `sqrt(mu / (4 + mu))`.
    pub fn peierls_stress(&self) -> f64 {
        (self.mu / (4.0 + self.mu)).sqrt()
    }

    /// Bound on real roots: `4 sin^2 <= 4` forces `V^2 k^2 <= mu + 4`.
    pub fn real_root_bound(&self, velocity: f64) -> f64 {
        (self.mu + 4.0).sqrt() / velocity
    }
}

pub(crate) fn check_velocity(velocity: f64) -> Result<()> {
    if velocity.is_finite() && velocity > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("velocity must be positive, got {velocity}")))
    }
}
