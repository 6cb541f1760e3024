//! Training losses over mask fields, all with analytic gradients.
//!
//! Three terms: a box-projection dice loss, a color-pairwise consistency
//! loss, and a temporal consistency loss over patch matches. Every public
//! loss returns its value together with the gradient with respect to each
//! of the `n * T * H * W` mask probabilities, and every gradient is checked
//! against central finite differences in the test suites.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod consistency;
pub mod finite_diff;
pub mod spatial;
pub mod temporal;
pub mod total;

pub use consistency::{consistency_loss, ConsistencyTerm};
pub use finite_diff::{finite_diff_gradient, relative_error, DEFAULT_CLAMP_EPS};
pub use spatial::{
    build_color_edges, pairwise_loss, projection_loss, ColorEdge, EdgeTopology, DICE_EPS,
    SIMILARITY_THETA,
};
pub use temporal::{tk_loss, tk_loss_with_matches};
pub use total::{total_loss, LossReport};

/// Loss mixing weights and numeric guards.
///
/// Defaults: pairwise weight 1.0, temporal weight 0.1, color similarity
/// cutoff 0.3, log clamp 1e-6.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LossWeights {
    pub lambda_pair: f64,
    pub lambda_temp: f64,
    /// Minimum Lab similarity for a neighbor pair to become an edge.
    pub sigma_pixel: f64,
    /// Lower clamp on the consistency probability before the log.
    pub clamp_eps: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            lambda_pair: 1.0,
            lambda_temp: 0.1,
            sigma_pixel: 0.3,
            clamp_eps: DEFAULT_CLAMP_EPS,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("lambda_pair", self.lambda_pair), ("lambda_temp", self.lambda_temp)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid_config(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        if !self.sigma_pixel.is_finite() || self.sigma_pixel < 0.0 {
            return Err(Error::invalid_config(format!(
                "sigma_pixel must be finite and non-negative, got {}",
                self.sigma_pixel
            )));
        }
        if !(self.clamp_eps > 0.0 && self.clamp_eps <= 1e-3) {
            return Err(Error::invalid_config(format!(
                "clamp_eps must lie in (0, 1e-3], got {}",
                self.clamp_eps
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_weights_match_documented_values() {
        let w = LossWeights::default();
        assert_eq!(w.lambda_pair, 1.0);
        assert_eq!(w.lambda_temp, 0.1);
        assert_eq!(w.sigma_pixel, 0.3);
        assert_eq!(w.clamp_eps, 1e-6);
        w.validate().unwrap();
    }

    #[test]
    fn clamp_eps_bounds_are_enforced() {
        let zero = LossWeights { clamp_eps: 0.0, ..Default::default() };
        assert!(zero.validate().is_err());
        let big = LossWeights { clamp_eps: 0.01, ..Default::default() };
        assert!(big.validate().is_err());
    }
}
