//! Central finite differences against arbitrary mask-field losses.
//!
//! This is the measuring stick for every analytic gradient in the crate:
//! perturb one mask entry by `±h`, re-evaluate the loss, difference. It is
//! deliberately ignorant of how any loss is computed.

use crate::error::{Error, Result};
use crate::video::MaskField;

/// Default log-clamp width, shared with `LossWeights::default`.
pub const DEFAULT_CLAMP_EPS: f64 = 1e-6;

/// Central-difference partials of `loss_fn` at the given entries, each an
/// `(instance, frame, y, x)` index. `h` must be in `[1e-7, 1e-3]` and every
/// probed entry must sit far enough inside `(0, 1)` that the perturbed
/// values stay valid probabilities clear of the log clamp.
pub fn finite_diff_gradient<F>(
    loss_fn: F,
    mask: &MaskField,
    entries: &[[usize; 4]],
    h: f64,
) -> Result<Vec<f64>>
where
    F: Fn(&MaskField) -> Result<f64>,
{
    if !(1e-7..=1e-3).contains(&h) {
        return Err(Error::invalid_config(format!(
            "step size {h} outside [1e-7, 1e-3]"
        )));
    }
    let dims = mask.values().dim();
    let mut out = Vec::with_capacity(entries.len());
    let mut probe = mask.clone();
    for &[i, t, y, x] in entries {
        if i >= dims.0 || t >= dims.1 || y >= dims.2 || x >= dims.3 {
            return Err(Error::invalid_config(format!(
                "entry ({i}, {t}, {y}, {x}) outside mask field {dims:?}"
            )));
        }
        let center = mask.values()[[i, t, y, x]];
        if center - h <= DEFAULT_CLAMP_EPS || center + h >= 1.0 - DEFAULT_CLAMP_EPS {
            return Err(Error::invalid_config(format!(
                "entry value {center} too close to [0, 1] boundary for step {h}"
            )));
        }
        probe.values_mut()[[i, t, y, x]] = center + h;
        let plus = loss_fn(&probe)?;
        probe.values_mut()[[i, t, y, x]] = center - h;
        let minus = loss_fn(&probe)?;
        probe.values_mut()[[i, t, y, x]] = center;
        out.push((plus - minus) / (2.0 * h));
    }
    Ok(out)
}

/// Gradient-check error `|a - n| / max(1, |a|, |n|)`: relative for large
/// gradients, absolute near zero where relative error is meaningless.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1.0)
}
