//! Combined training loss.
//!
//! `l_spatial = l_proj + lambda_pair * l_pair` and
//! `l_seg = l_spatial + lambda_temp * l_temp`, with the gradient combined
//! the same way. Terms whose weight is zero are skipped entirely, so a
//! spatial-only configuration never pays for matching.

use ndarray::Array4;

use crate::correspondence::{ConnectionScheme, PatchConfig};
use crate::error::Result;
use crate::losses::spatial::{build_color_edges, pairwise_loss, projection_loss, EdgeTopology};
use crate::losses::temporal::tk_loss;
use crate::losses::LossWeights;
use crate::video::{MaskField, Tube};

/// Scalar terms plus the gradient of `l_seg` with respect to every mask
/// probability.
#[derive(Debug, Clone, PartialEq)]
pub struct LossReport {
    pub l_temp: f64,
    pub l_proj: f64,
    pub l_pair: f64,
    pub l_spatial: f64,
    pub l_seg: f64,
    pub grad: Array4<f64>,
}

/// Evaluates the full loss at the current mask field. Matching runs from
/// scratch on every call; callers optimizing in a loop should instead
/// freeze match sets once and combine the component losses themselves.
pub fn total_loss(
    mask: &MaskField,
    tube: &Tube,
    config: &PatchConfig,
    weights: &LossWeights,
    scheme: ConnectionScheme,
) -> Result<LossReport> {
    weights.validate()?;
    config.validate()?;

    let (l_proj, mut grad) = projection_loss(mask, tube)?;

    let l_pair = if weights.lambda_pair > 0.0 {
        let topology = EdgeTopology::default();
        let edges: Vec<_> = tube
            .frames()
            .iter()
            .map(|f| build_color_edges(f, weights.sigma_pixel, &topology))
            .collect::<Result<_>>()?;
        let (l_pair, pair_grad) = pairwise_loss(mask, &edges, weights.clamp_eps);
        grad.scaled_add(weights.lambda_pair, &pair_grad);
        l_pair
    } else {
        0.0
    };

    let l_temp = if weights.lambda_temp > 0.0 {
        let (l_temp, temp_grad) = tk_loss(mask, tube, config, scheme, weights.clamp_eps)?;
        grad.scaled_add(weights.lambda_temp, &temp_grad);
        l_temp
    } else {
        0.0
    };

    let l_spatial = l_proj + weights.lambda_pair * l_pair;
    let l_seg = l_spatial + weights.lambda_temp * l_temp;
    Ok(LossReport { l_temp, l_proj, l_pair, l_spatial, l_seg, grad })
}
