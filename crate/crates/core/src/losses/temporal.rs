//! Temporal consistency loss over patch matches.
//!
//! Every match pair `(p, p̂)` between connected frames `(t, t̂)` contributes
//! a consistency term between the mask probabilities at its endpoints. Each
//! connection is normalized by the number of frame pixels (not by its match
//! count), connections are summed, and the result is averaged over
//! instances.

use ndarray::Array4;

use crate::correspondence::{compute_tube_matches, ConnectionScheme, MatchSet, PatchConfig};
use crate::error::{Error, Result};
use crate::losses::consistency::consistency_loss;
use crate::video::{MaskField, Tube};

/// Temporal loss plus gradient, computing matches on the fly from the
/// tube's frames. Needs at least two frames.
pub fn tk_loss(
    mask: &MaskField,
    tube: &Tube,
    config: &PatchConfig,
    scheme: ConnectionScheme,
    clamp_eps: f64,
) -> Result<(f64, Array4<f64>)> {
    if mask.n_frames() != tube.n_frames()
        || mask.height() != tube.height()
        || mask.width() != tube.width()
    {
        return Err(Error::dim(format!(
            "mask field ({}, {}, {}) vs tube ({}, {}, {})",
            mask.n_frames(),
            mask.height(),
            mask.width(),
            tube.n_frames(),
            tube.height(),
            tube.width()
        )));
    }
    let match_sets = compute_tube_matches(tube, config, scheme)?;
    tk_loss_with_matches(mask, &match_sets, clamp_eps)
}

/// Temporal loss over precomputed match sets. This is what the trainer
/// uses: match sets are frozen once and the loss is re-evaluated as the
/// mask field changes. No gradient flows through the matching itself.
pub fn tk_loss_with_matches(
    mask: &MaskField,
    match_sets: &[MatchSet],
    clamp_eps: f64,
) -> Result<(f64, Array4<f64>)> {
    let (n, t_len, h, w) = mask.values().dim();
    let values = mask.values();
    let mut grad = Array4::zeros((n, t_len, h, w));
    let mut total = 0.0;
    let scale = 1.0 / (n as f64 * (h * w) as f64);

    for ms in match_sets {
        if ms.source >= t_len || ms.target >= t_len {
            return Err(Error::dim(format!(
                "match set connects frames ({}, {}), mask field has {t_len}",
                ms.source, ms.target
            )));
        }
        if ms.height != h || ms.width != w {
            return Err(Error::dim(format!(
                "match set {}x{} vs mask field {h}x{w}",
                ms.height, ms.width
            )));
        }
        for y in 0..h {
            for x in 0..w {
                let matches = ms.at(x, y);
                if matches.is_empty() {
                    continue;
                }
                for i in 0..n {
                    let a = values[[i, ms.source, y, x]];
                    for m in matches {
                        let (mx, my) = (m.x as usize, m.y as usize);
                        let b = values[[i, ms.target, my, mx]];
                        let term = consistency_loss(a, b, clamp_eps);
                        total += term.value * scale;
                        grad[[i, ms.source, y, x]] += term.grad_a * scale;
                        grad[[i, ms.target, my, mx]] += term.grad_b * scale;
                    }
                }
            }
        }
    }
    Ok((total, grad))
}
