//! Spatial box supervision: projection and color-pairwise losses.
//!
//! The projection loss compares the per-axis max-projection of a soft mask
//! against the projection of its ground-truth box (a run of ones), via a
//! soft dice loss per axis per frame. Gradients flow through each max onto
//! its argmax pixel, first occurrence winning ties.
//!
//! The pairwise loss pulls color-similar neighbor pixels toward agreeing
//! mask probabilities. Edges connect each pixel to its 8-neighborhood at a
//! configurable pixel dilation; an edge survives when the Lab similarity
//! `exp(-||lab_i - lab_j||_2 / 0.1)` reaches `sigma_pixel`. Each frame
//! contributes the mean consistency loss over its surviving edges.

use ndarray::Array4;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::losses::consistency::consistency_loss;
use crate::video::{Frame, MaskField, Tube};

/// Additive smoothing inside the dice ratio.
pub const DICE_EPS: f64 = 1e-5;

/// Decay scale of the Lab similarity kernel.
pub const SIMILARITY_THETA: f64 = 0.1;

/// Soft dice loss `1 - (2<a,b> + eps) / (|a|^2 + |b|^2 + eps)` with its
/// gradient in the first argument.
fn dice_loss(a: &[f64], b: &[f64]) -> (f64, Vec<f64>) {
    debug_assert_eq!(a.len(), b.len());
    let mut dot = 0.0;
    let mut norm_a = 0.0;
    let mut norm_b = 0.0;
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        norm_a += x * x;
        norm_b += y * y;
    }
    let num = 2.0 * dot + DICE_EPS;
    let den = norm_a + norm_b + DICE_EPS;
    let value = 1.0 - num / den;
    let grad = a
        .iter()
        .zip(b)
        .map(|(x, y)| -(2.0 * y * den - num * 2.0 * x) / (den * den))
        .collect();
    (value, grad)
}

/// Box-projection loss over all frames and both axes, averaged over
/// instances. Returns the loss and its gradient with respect to every mask
/// entry. Requires the mask field and the tube to agree on shape and
/// instance count (every instance needs a box in every frame).
pub fn projection_loss(mask: &MaskField, tube: &Tube) -> Result<(f64, Array4<f64>)> {
    mask.check_against(tube)?;
    let (n, t_len, h, w) = mask.values().dim();
    let values = mask.values();
    let mut grad = Array4::zeros((n, t_len, h, w));
    let mut total = 0.0;
    let inv_n = 1.0 / n as f64;

    for i in 0..n {
        for t in 0..t_len {
            let b = tube.gt_box(t, i);

            // Column projection: max over rows, first occurrence keeps the
            // subgradient on ties.
            let mut col_max = vec![f64::NEG_INFINITY; w];
            let mut col_arg = vec![0usize; w];
            for y in 0..h {
                for x in 0..w {
                    let v = values[[i, t, y, x]];
                    if v > col_max[x] {
                        col_max[x] = v;
                        col_arg[x] = y;
                    }
                }
            }
            let box_cols: Vec<f64> = (0..w)
                .map(|x| if (x as u32) >= b.x_min && (x as u32) < b.x_max { 1.0 } else { 0.0 })
                .collect();
            let (v_cols, g_cols) = dice_loss(&col_max, &box_cols);
            total += v_cols * inv_n;
            for x in 0..w {
                grad[[i, t, col_arg[x], x]] += g_cols[x] * inv_n;
            }

            // Row projection: max over columns.
            let mut row_max = vec![f64::NEG_INFINITY; h];
            let mut row_arg = vec![0usize; h];
            for y in 0..h {
                for x in 0..w {
                    let v = values[[i, t, y, x]];
                    if v > row_max[y] {
                        row_max[y] = v;
                        row_arg[y] = x;
                    }
                }
            }
            let box_rows: Vec<f64> = (0..h)
                .map(|y| if (y as u32) >= b.y_min && (y as u32) < b.y_max { 1.0 } else { 0.0 })
                .collect();
            let (v_rows, g_rows) = dice_loss(&row_max, &box_rows);
            total += v_rows * inv_n;
            for y in 0..h {
                grad[[i, t, y, row_arg[y]]] += g_rows[y] * inv_n;
            }
        }
    }
    Ok((total, grad))
}

/// Neighborhood shape for color edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EdgeTopology {
    /// Pixel distance to the 8 neighbors.
    pub dilation: u32,
}

impl Default for EdgeTopology {
    fn default() -> Self {
        EdgeTopology { dilation: 2 }
    }
}

/// One undirected neighbor pair, endpoints as `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColorEdge {
    pub a: (usize, usize),
    pub b: (usize, usize),
    pub similarity: f64,
}

/// Collects color-similar neighbor pairs of one frame. Every unordered
/// 8-neighbor pair at the topology's dilation appears at most once; pairs
/// reaching outside the frame are dropped, not clamped.
pub fn build_color_edges(
    frame: &Frame,
    sigma_pixel: f64,
    topology: &EdgeTopology,
) -> Result<Vec<ColorEdge>> {
    if topology.dilation == 0 {
        return Err(Error::invalid_config("edge dilation must be at least 1"));
    }
    if !sigma_pixel.is_finite() || sigma_pixel < 0.0 {
        return Err(Error::invalid_config(format!(
            "sigma_pixel must be finite and non-negative, got {sigma_pixel}"
        )));
    }
    let (h, w) = (frame.height() as i64, frame.width() as i64);
    let d = topology.dilation as i64;
    // Forward half of the 8-neighborhood; the reverse half would duplicate
    // edges.
    let offsets = [(d, 0), (-d, d), (0, d), (d, d)];
    let mut edges = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let lab_a = frame.lab_at(x as usize, y as usize);
            for (dx, dy) in offsets {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || nx >= w || ny < 0 || ny >= h {
                    continue;
                }
                let lab_b = frame.lab_at(nx as usize, ny as usize);
                let dist = ((lab_a[0] - lab_b[0]).powi(2)
                    + (lab_a[1] - lab_b[1]).powi(2)
                    + (lab_a[2] - lab_b[2]).powi(2))
                .sqrt();
                let similarity = (-dist / SIMILARITY_THETA).exp();
                if similarity >= sigma_pixel {
                    edges.push(ColorEdge {
                        a: (x as usize, y as usize),
                        b: (nx as usize, ny as usize),
                        similarity,
                    });
                }
            }
        }
    }
    Ok(edges)
}

/// Pairwise consistency loss: per frame the mean consistency term over its
/// edge set, averaged over frames and instances. `edges[t]` must come from
/// frame `t` of the same tube the mask field describes.
pub fn pairwise_loss(
    mask: &MaskField,
    edges: &[Vec<ColorEdge>],
    clamp_eps: f64,
) -> (f64, Array4<f64>) {
    let (n, t_len, h, w) = mask.values().dim();
    assert_eq!(edges.len(), t_len, "one edge set per frame");
    let values = mask.values();
    let mut grad = Array4::zeros((n, t_len, h, w));
    let mut total = 0.0;
    for t in 0..t_len {
        let edge_set = &edges[t];
        if edge_set.is_empty() {
            continue;
        }
        let scale = 1.0 / (n as f64 * t_len as f64 * edge_set.len() as f64);
        for e in edge_set {
            let (ax, ay) = e.a;
            let (bx, by) = e.b;
            debug_assert!(ax < w && ay < h && bx < w && by < h);
            for i in 0..n {
                let term =
                    consistency_loss(values[[i, t, ay, ax]], values[[i, t, by, bx]], clamp_eps);
                total += term.value * scale;
                grad[[i, t, ay, ax]] += term.grad_a * scale;
                grad[[i, t, by, bx]] += term.grad_b * scale;
            }
        }
    }
    (total, grad)
}
