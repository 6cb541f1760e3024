//! Costs between box mask sequences.
//!
//! The spatio-temporal cost treats a whole track as one set: point samples
//! from every frame are concatenated and scored with a single dice
//! complement, so a track that aligns well in most frames is not punished
//! frame by frame. The framewise baseline averages a per-frame box cost
//! (normalized corner L1 plus a generalized IoU complement) instead.

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::losses::DICE_EPS;
use crate::video::{BoundingBox, MaskField, Tube};

use super::{BoxMaskSequence, CostMatrix};

/// How point samples for the spatio-temporal cost are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplePolicy {
    /// Uniform over the whole frame.
    WholeFrame,
    /// Uniform over the union of the two sequences' boxes in that frame,
    /// falling back to the whole frame when both are empty.
    InsideBoxes,
}

/// Reduce one instance of a soft mask field to a box mask sequence: each
/// frame becomes the tight box of the pixels at or above `bin_threshold`,
/// or an empty frame when nothing clears it.
pub fn mask_to_boxmask(mask: &MaskField, instance: usize, bin_threshold: f64) -> Result<BoxMaskSequence> {
    if instance >= mask.n_instances() {
        return Err(Error::dim(format!(
            "instance {instance} out of range, mask field has {}",
            mask.n_instances()
        )));
    }
    if !(0.0..=1.0).contains(&bin_threshold) {
        return Err(Error::invalid_config(format!(
            "binarization threshold {bin_threshold} outside [0, 1]"
        )));
    }
    let (_, t_len, h, w) = mask.values().dim();
    let mut frames = Vec::with_capacity(t_len);
    for t in 0..t_len {
        let mut x_min = w as u32;
        let mut y_min = h as u32;
        let mut x_max = 0u32;
        let mut y_max = 0u32;
        let mut any = false;
        for y in 0..h {
            for x in 0..w {
                if mask.values()[[instance, t, y, x]] >= bin_threshold {
                    any = true;
                    x_min = x_min.min(x as u32);
                    y_min = y_min.min(y as u32);
                    x_max = x_max.max(x as u32 + 1);
                    y_max = y_max.max(y as u32 + 1);
                }
            }
        }
        frames.push(any.then(|| BoundingBox::new(x_min, y_min, x_max, y_max)));
    }
    BoxMaskSequence::new(h, w, frames)
}

fn frame_sample_region(
    a: Option<&BoundingBox>,
    b: Option<&BoundingBox>,
    height: usize,
    width: usize,
    policy: SamplePolicy,
) -> Vec<(u32, u32)> {
    let whole = || -> Vec<(u32, u32)> {
        (0..height as u32)
            .flat_map(|y| (0..width as u32).map(move |x| (x, y)))
            .collect()
    };
    match policy {
        SamplePolicy::WholeFrame => whole(),
        SamplePolicy::InsideBoxes => {
            if a.is_none() && b.is_none() {
                return whole();
            }
            let inside = |bx: Option<&BoundingBox>, x: u32, y: u32| {
                bx.is_some_and(|bx| bx.contains(x, y))
            };
            let pts: Vec<(u32, u32)> = (0..height as u32)
                .flat_map(|y| (0..width as u32).map(move |x| (x, y)))
                .filter(|&(x, y)| inside(a, x, y) || inside(b, x, y))
                .collect();
            if pts.is_empty() {
                whole()
            } else {
                pts
            }
        }
    }
}

/// Draw `n_points` pixel coordinates per frame for comparing two box mask
/// sequences. The draw is uniform with replacement and fully determined by
/// `seed`; both sequences are sampled at the same points.
pub fn sample_points(
    a: &BoxMaskSequence,
    b: &BoxMaskSequence,
    n_points: usize,
    seed: u64,
    policy: SamplePolicy,
) -> Result<Vec<Vec<(u32, u32)>>> {
    a.check_same_shape(b)?;
    if n_points == 0 {
        return Err(Error::invalid_config("n_points must be at least 1".to_string()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(a.n_frames());
    for t in 0..a.n_frames() {
        let region = frame_sample_region(
            a.frames()[t].as_ref(),
            b.frames()[t].as_ref(),
            a.height(),
            a.width(),
            policy,
        );
        let pts = (0..n_points)
            .map(|_| region[rng.gen_range(0..region.len())])
            .collect();
        out.push(pts);
    }
    Ok(out)
}

fn dice_cost_binary(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let sa: f64 = a.iter().map(|x| x * x).sum();
    let sb: f64 = b.iter().map(|y| y * y).sum();
    1.0 - (2.0 * num + DICE_EPS) / (sa + sb + DICE_EPS)
}

/// Spatio-temporal cost between two box mask sequences: one dice
/// complement over point samples pooled from all frames.
pub fn st_boxmask_cost(
    a: &BoxMaskSequence,
    b: &BoxMaskSequence,
    n_points: usize,
    seed: u64,
    policy: SamplePolicy,
) -> Result<f64> {
    let points = sample_points(a, b, n_points, seed, policy)?;
    let mut va = Vec::with_capacity(points.len() * n_points);
    let mut vb = Vec::with_capacity(points.len() * n_points);
    for (t, pts) in points.iter().enumerate() {
        for &(x, y) in pts {
            va.push(a.value_at(t, x, y));
            vb.push(b.value_at(t, x, y));
        }
    }
    Ok(dice_cost_binary(&va, &vb))
}

/// Spatio-temporal cost evaluated on every pixel of every frame instead of
/// a random sample. Slower, but exact; used as the sampling oracle.
pub fn st_boxmask_cost_exhaustive(a: &BoxMaskSequence, b: &BoxMaskSequence) -> Result<f64> {
    a.check_same_shape(b)?;
    let mut va = Vec::with_capacity(a.n_frames() * a.height() * a.width());
    let mut vb = Vec::with_capacity(va.capacity());
    for t in 0..a.n_frames() {
        for y in 0..a.height() as u32 {
            for x in 0..a.width() as u32 {
                va.push(a.value_at(t, x, y));
                vb.push(b.value_at(t, x, y));
            }
        }
    }
    Ok(dice_cost_binary(&va, &vb))
}

fn corners_normalized(b: Option<&BoundingBox>, width: usize, height: usize) -> [f64; 4] {
    // An empty frame degenerates to a point box at the origin.
    match b {
        Some(b) => [
            b.x_min as f64 / width as f64,
            b.y_min as f64 / height as f64,
            b.x_max as f64 / width as f64,
            b.y_max as f64 / height as f64,
        ],
        None => [0.0; 4],
    }
}

fn generalized_iou(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    let area = |c: &[f64; 4]| (c[2] - c[0]) * (c[3] - c[1]);
    let iw = (a[2].min(b[2]) - a[0].max(b[0])).max(0.0);
    let ih = (a[3].min(b[3]) - a[1].max(b[1])).max(0.0);
    let inter = iw * ih;
    let union = area(a) + area(b) - inter;
    let iou = if union > 0.0 {
        inter / union
    } else if a == b {
        // Two identical point boxes count as a perfect overlap.
        1.0
    } else {
        0.0
    };
    let cw = a[2].max(b[2]) - a[0].min(b[0]);
    let ch = a[3].max(b[3]) - a[1].min(b[1]);
    let hull = cw * ch;
    if hull > 0.0 {
        iou - (hull - union) / hull
    } else {
        iou
    }
}

/// Per-frame baseline cost: mean over frames of the normalized corner L1
/// distance plus the generalized IoU complement.
pub fn framewise_cost(a: &BoxMaskSequence, b: &BoxMaskSequence) -> Result<f64> {
    a.check_same_shape(b)?;
    let mut total = 0.0;
    for t in 0..a.n_frames() {
        let ca = corners_normalized(a.frames()[t].as_ref(), a.width(), a.height());
        let cb = corners_normalized(b.frames()[t].as_ref(), b.width(), b.height());
        let l1: f64 = ca.iter().zip(&cb).map(|(x, y)| (x - y).abs()).sum();
        total += l1 + (1.0 - generalized_iou(&ca, &cb));
    }
    Ok(total / a.n_frames() as f64)
}

fn prediction_sequences(
    mask: &MaskField,
    bin_threshold: f64,
) -> Result<Vec<BoxMaskSequence>> {
    (0..mask.n_instances())
        .map(|i| mask_to_boxmask(mask, i, bin_threshold))
        .collect()
}

fn gt_sequences(tube: &Tube) -> Result<Vec<BoxMaskSequence>> {
    (0..tube.n_instances())
        .map(|i| BoxMaskSequence::from_gt_boxes(tube, i))
        .collect()
}

fn check_tube_mask_dims(mask: &MaskField, tube: &Tube) -> Result<()> {
    if mask.n_frames() != tube.n_frames()
        || mask.height() != tube.height()
        || mask.width() != tube.width()
    {
        return Err(Error::dim(format!(
            "mask field {}x{}x{} does not match tube {}x{}x{}",
            mask.n_frames(),
            mask.height(),
            mask.width(),
            tube.n_frames(),
            tube.height(),
            tube.width()
        )));
    }
    Ok(())
}

/// Spatio-temporal cost matrix between mask field instances (rows) and
/// ground-truth tracks (columns). Every entry reuses the same seed, so the
/// matrix is reproducible as a whole.
pub fn cost_matrix_st(
    mask: &MaskField,
    tube: &Tube,
    bin_threshold: f64,
    n_points: usize,
    seed: u64,
    policy: SamplePolicy,
) -> Result<CostMatrix> {
    check_tube_mask_dims(mask, tube)?;
    let preds = prediction_sequences(mask, bin_threshold)?;
    let gts = gt_sequences(tube)?;
    let mut costs = Array2::zeros((preds.len(), gts.len()));
    for (r, p) in preds.iter().enumerate() {
        for (c, g) in gts.iter().enumerate() {
            costs[[r, c]] = st_boxmask_cost(p, g, n_points, seed, policy)?;
        }
    }
    CostMatrix::new(costs)
}

/// Framewise cost matrix between mask field instances and ground-truth
/// tracks, for comparing assignment behavior against the pooled cost.
pub fn cost_matrix_framewise(
    mask: &MaskField,
    tube: &Tube,
    bin_threshold: f64,
) -> Result<CostMatrix> {
    check_tube_mask_dims(mask, tube)?;
    let preds = prediction_sequences(mask, bin_threshold)?;
    let gts = gt_sequences(tube)?;
    let mut costs = Array2::zeros((preds.len(), gts.len()));
    for (r, p) in preds.iter().enumerate() {
        for (c, g) in gts.iter().enumerate() {
            costs[[r, c]] = framewise_cost(p, g)?;
        }
    }
    CostMatrix::new(costs)
}
